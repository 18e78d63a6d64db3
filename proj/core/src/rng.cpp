#include "permadyn/rng.hpp"

#include <numbers>

namespace permadyn {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : label) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

Rng Rng::stream(std::uint64_t master, std::string_view label,
                std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t s = mix64(master ^ 0x6A09E667F3BCC908ULL);
    s = mix64(s ^ hash_label(label));
    s = mix64(s ^ (a * 0x9E3779B97F4A7C15ULL + 1));
    s = mix64(s ^ (b * 0xC2B2AE3D27D4EB4FULL + 2));
    s = mix64(s ^ (c * 0x165667B19E3779F9ULL + 3));
    return Rng(s);
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

long Rng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
        // multiplication method
        const double limit = std::exp(-mean);
        long k = 0;
        double prod = uniform_pos();
        while (prod > limit) {
            prod *= uniform_pos();
            ++k;
        }
        return k;
    }
    // PTRS transformed rejection (Hormann), exact for mean >= 10.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = uniform() - 0.5;
        double v = uniform_pos();
        double us = 0.5 - std::abs(u);
        double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<long>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * std::log(mean) - mean - std::lgamma(k + 1.0)) {
            return static_cast<long>(k);
        }
    }
}

} // namespace permadyn
