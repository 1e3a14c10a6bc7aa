#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace anonbandits {

/// One independent stream of randomness. Streams are derived from a root
/// seed and a name so that e.g. reward noise and algorithm-internal draws
/// never share state.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform on [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [lo, hi] inclusive
    int uniform_int(int lo, int hi) {
        std::uniform_int_distribution<int> dist(lo, hi);
        return dist(gen_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double gaussian(double mean = 0.0, double stddev = 1.0) {
        std::normal_distribution<double> dist(mean, stddev);
        return dist(gen_);
    }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
};

namespace detail {

// FNV-1a over bytes, with a splitmix64 finalizer for better avalanche.
inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Derives independent named streams from one root seed via a stable
/// 64-bit hash of (root, name, index).
class RngFactory {
  public:
    explicit RngFactory(std::uint64_t root_seed) : root_(root_seed) {}

    std::uint64_t root() const { return root_; }

    static std::uint64_t derive(std::uint64_t root, std::string_view name,
                                std::uint64_t index = 0) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        h = detail::fnv1a(h, &root, sizeof(root));
        h = detail::fnv1a(h, name.data(), name.size());
        h = detail::fnv1a(h, &index, sizeof(index));
        return detail::mix64(h);
    }

    RngStream stream(std::string_view name, std::uint64_t index = 0) const {
        return RngStream(derive(root_, name, index));
    }

  private:
    std::uint64_t root_;
};

}  // namespace anonbandits
