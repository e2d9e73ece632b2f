#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "special.hpp"

// Counter-based splittable RNG. Every consumer of randomness (bootstrap
// replicate, Monte-Carlo run, generator call) owns a Stream keyed by
// (seed, stream index), so results are independent of evaluation order and
// worker count.

namespace uqcal::rng {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer: a strong 64 -> 64 bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives a child seed from (seed, index); used to key sub-streams of an
// experiment without overlap between siblings.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed + golden_gamma) ^ mix64(index + 0x8e9c5b0cf828d1a5ULL));
}

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream)
        : state_(derive_seed(seed, stream)) {}

    std::uint64_t next_u64() {
        state_ += golden_gamma;
        return mix64(state_);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1); never returns an exact endpoint.
    double next_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t next_below(std::uint64_t n) {
        // Multiply-shift bounded draw; bias is < n / 2^64, irrelevant here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal by inverse-CDF; deterministic draw count (one uniform).
    double normal() { return sf::normal_quantile(next_open()); }

    // Gamma(shape, scale 1) by Marsaglia-Tsang, with the u^(1/a) boost for
    // shape < 1.
    double gamma(double shape) {
        if (shape <= 0.0)
            throw std::invalid_argument("gamma: shape must be positive");
        if (shape < 1.0) {
            const double u = next_open();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_open();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

    // Inverse-gamma with shape alpha and scale beta: beta / Gamma(alpha, 1).
    double inverse_gamma(double alpha, double beta) {
        return beta / gamma(alpha);
    }

    double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

    // Student-t as normal over sqrt(chi^2 / nu).
    double student_t(double dof) {
        return normal() / std::sqrt(chi_squared(dof) / dof);
    }

    // Variance-1 scaled Student-t; requires dof > 2 for the variance to exist.
    double student_t_scaled(double dof) {
        if (dof <= 2.0)
            throw std::invalid_argument("student_t_scaled: dof must exceed 2");
        return student_t(dof) * std::sqrt((dof - 2.0) / dof);
    }

private:
    std::uint64_t state_;
};

} // namespace uqcal::rng
