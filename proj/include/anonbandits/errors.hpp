#pragma once

#include <stdexcept>
#include <string>

namespace anonbandits {

struct AnonymityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArm : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleCluster : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuotaUnmet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ClusterTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotInPolytope : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HorizonTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExplorationTooShort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace anonbandits
