#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "anonbandits/errors.hpp"

namespace anonbandits {

/// Static batch grid for successive elimination: boundaries depend only on
/// (T', B), never on feedback. t_b ~ a^(2 - 2^(1-b)) with
/// a = T'^(1/(2 - 2^(1-B))).
struct BaseGrid {
    long long horizon = 0;
    int batches = 0;
    std::vector<long long> boundaries;  // t_0 = 0 < t_1 < ... < t_B = horizon
    double a = 0.0;

    long long batch_length(int b) const {  // b in [1, batches]
        return boundaries[b] - boundaries[b - 1];
    }
};

inline int default_batches(long long t_horizon) {
    if (t_horizon < 4) return 1;
    const double ll = std::log2(std::log2(static_cast<double>(t_horizon)));
    return std::max(1, static_cast<int>(std::floor(ll)));
}

inline BaseGrid make_grid(long long t_horizon, int b_batches) {
    if (t_horizon < 2) throw GridInfeasible("horizon must be >= 2");
    if (b_batches < 1) throw GridInfeasible("need at least one batch");
    if (t_horizon < b_batches)
        throw GridInfeasible("cannot make " + std::to_string(b_batches) +
                             " nonempty batches out of " + std::to_string(t_horizon) +
                             " rounds");
    BaseGrid grid;
    grid.horizon = t_horizon;
    grid.batches = b_batches;
    const double B = static_cast<double>(b_batches);
    grid.a = std::pow(static_cast<double>(t_horizon), 1.0 / (2.0 - std::pow(2.0, 1.0 - B)));
    grid.boundaries.assign(b_batches + 1, 0);
    for (int b = 1; b < b_batches; ++b) {
        const double exponent = 2.0 - std::pow(2.0, 1.0 - static_cast<double>(b));
        grid.boundaries[b] = std::min<long long>(
            t_horizon, static_cast<long long>(std::ceil(std::pow(grid.a, exponent))));
    }
    grid.boundaries[b_batches] = t_horizon;
    // collapse degenerate equal boundaries by +1 shifts, keeping t_B = T'
    for (int b = 1; b < b_batches; ++b)
        grid.boundaries[b] = std::max(grid.boundaries[b], grid.boundaries[b - 1] + 1);
    for (int b = b_batches - 1; b >= 1; --b)
        grid.boundaries[b] = std::min(grid.boundaries[b], grid.boundaries[b + 1] - 1);
    return grid;
}

/// One batched successive-elimination learner (one per user in the
/// multi-user algorithm). Feed per-arm sample lists at each batch boundary;
/// arms whose empirical mean trails the leader by sqrt(gamma * sigma^2 / tau)
/// get eliminated.
class BaseState {
  public:
    struct BatchPlan {
        std::vector<int> active;
        long long quota = 0;  // per-arm samples expected this batch
    };

    BaseState(int n_arms, BaseGrid grid, double gamma, double noise_proxy)
        : grid_(std::move(grid)),
          gamma_(gamma),
          noise_proxy_(noise_proxy),
          counts_(n_arms, 0),
          sums_(n_arms, 0.0) {
        if (gamma_ <= 0.0) throw std::invalid_argument("gamma must be positive");
        active_.resize(n_arms);
        for (int j = 0; j < n_arms; ++j) active_[j] = j;
    }

    /// Default learning rate: gamma_const * ln(N*K*T).
    static double default_gamma(long long n_users, long long n_arms, long long horizon,
                                double gamma_const = 2.0) {
        return gamma_const *
               std::log(static_cast<double>(n_users) * static_cast<double>(n_arms) *
                        static_cast<double>(horizon));
    }

    const BaseGrid& grid() const { return grid_; }
    int current_batch() const { return batch_; }
    bool finished() const { return batch_ > grid_.batches; }
    const std::vector<int>& active() const { return active_; }
    double gamma() const { return gamma_; }
    double noise_proxy() const { return noise_proxy_; }
    long long count(int arm) const { return counts_[arm]; }

    BatchPlan begin_batch() const {
        if (finished()) throw std::logic_error("all batches consumed");
        const long long d = grid_.batch_length(batch_);
        const long long k = static_cast<long long>(active_.size());
        return BatchPlan{active_, (d + k - 1) / k};
    }

    /// Accumulates samples, eliminates trailing arms, and advances the
    /// batch. `samples` is indexed by arm id; only active arms are read.
    /// With `enforce_quota` every active arm must meet the announced quota.
    std::vector<int> end_batch(const std::vector<std::vector<double>>& samples,
                               bool enforce_quota = true) {
        const BatchPlan plan = begin_batch();
        for (int j : plan.active) {
            const auto& xs = samples[j];
            if (enforce_quota && static_cast<long long>(xs.size()) < plan.quota)
                throw QuotaUnmet("arm " + std::to_string(j) + " got " +
                                 std::to_string(xs.size()) + " samples, quota " +
                                 std::to_string(plan.quota));
            counts_[j] += static_cast<long long>(xs.size());
            for (double x : xs) sums_[j] += x;
        }
        long long tau = 0;
        for (int j : active_) tau = std::max(tau, counts_[j]);
        if (tau > 0) {
            const int leader = best_arm();
            const double lead_mean = sums_[leader] / static_cast<double>(counts_[leader]);
            const double threshold =
                std::sqrt(gamma_ * noise_proxy_ / static_cast<double>(tau));
            std::vector<int> survivors;
            for (int j : active_) {
                if (j == leader || counts_[j] == 0) {
                    survivors.push_back(j);
                    continue;
                }
                const double mean = sums_[j] / static_cast<double>(counts_[j]);
                if (lead_mean - mean < threshold) survivors.push_back(j);
            }
            active_ = std::move(survivors);
        }
        ++batch_;
        return active_;
    }

    /// Empirical best active arm; ties and unsampled states break to the
    /// lowest index.
    int best_arm() const {
        int best = active_.front();
        double best_mean = -std::numeric_limits<double>::infinity();
        for (int j : active_) {
            if (counts_[j] == 0) continue;
            const double mean = sums_[j] / static_cast<double>(counts_[j]);
            if (mean > best_mean) {
                best_mean = mean;
                best = j;
            }
        }
        return best;
    }

  private:
    BaseGrid grid_;
    double gamma_;
    double noise_proxy_;
    std::vector<int> active_;
    std::vector<long long> counts_;
    std::vector<double> sums_;
    int batch_ = 1;
};

}  // namespace anonbandits
