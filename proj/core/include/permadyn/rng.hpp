#ifndef PERMADYN_RNG_HPP
#define PERMADYN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

namespace permadyn {

/// Counter-based pseudo-random stream (SplitMix64 core).
///
/// Streams are addressed by (master seed, label, up to three indices), so a
/// replica, field or role gets its own stream and parallel execution order
/// cannot change any draw. All distribution samplers below are hand-rolled
/// to keep output byte-stable across standard library versions.
class Rng {
public:
    Rng() : state_(0) {}
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derive a stream from a master seed, a role label and indices.
    static Rng stream(std::uint64_t master, std::string_view label,
                      std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0);

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log argument.
    double uniform_pos() { return 1.0 - uniform(); }

    /// Standard normal (Box-Muller, pair cached).
    double normal();

    /// Exponential with the given rate.
    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    /// Poisson with the given mean (>= 0). Exact inversion for small means,
    /// transformed-rejection (PTRS) for large ones.
    long poisson(double mean);

private:
    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// FNV-1a over a byte string; used to turn stream labels into key material.
std::uint64_t hash_label(std::string_view label);

} // namespace permadyn

#endif
