#pragma once

// Deterministic sampling primitives.
//
// All draws run on std::mt19937_64, whose output sequence is pinned by the
// standard, and every transform below is implemented here rather than through
// std::*_distribution (whose algorithms are implementation-defined). A given
// seed therefore produces the same stream on every compiler and platform.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace rpvbayes {

using Rng = std::mt19937_64;

// Stream tags keep data generation and posterior sampling on separate
// substreams so both methods can replay identical data for a run id.
inline constexpr std::uint64_t kDataStream = 1;
inline constexpr std::uint64_t kAnalysisStream = 2;
inline constexpr std::uint64_t kReplicateStream = 3;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-run, per-stream seed. Depends only on its arguments, never on how many
// other runs exist or which thread executes them.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t run_id,
                                 std::uint64_t stream_tag) {
    std::uint64_t h = splitmix64(base_seed);
    h = splitmix64(h ^ run_id);
    h = splitmix64(h ^ stream_tag);
    return h;
}

// Uniform on [0, 1), 53-bit resolution.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool draw_bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

// Standard normal via Box-Muller (cosine branch). Two uniforms per draw,
// no cached spare, so the stream position after a draw is predictable.
inline double draw_normal(Rng& rng) {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1], keeps log finite
    const double u2 = uniform01(rng);
    constexpr double two_pi = 6.283185307179586476925287;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Gamma(shape, scale) by Marsaglia-Tsang squeeze rejection, with the
// U^(1/shape) boost for shape < 1.
inline double draw_gamma(Rng& rng, double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
        throw std::invalid_argument("draw_gamma: shape and scale must be positive");
    }
    double boost = 1.0;
    if (shape < 1.0) {
        boost = std::pow(uniform01(rng), 1.0 / shape);
        shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z, v;
        do {
            z = draw_normal(rng);
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - uniform01(rng);  // (0, 1]
        if (u < 1.0 - 0.0331 * (z * z) * (z * z)) {
            return boost * d * v * scale;
        }
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) {
            return boost * d * v * scale;
        }
    }
}

// Beta(a, b) as Ga/(Ga+Gb) with unit-scale gammas.
inline double draw_beta(Rng& rng, double a, double b) {
    const double x = draw_gamma(rng, a, 1.0);
    const double y = draw_gamma(rng, b, 1.0);
    return x / (x + y);
}

inline double draw_chi_squared(Rng& rng, double dof) {
    return draw_gamma(rng, 0.5 * dof, 2.0);
}

// Standard Student-t: N(0,1) / sqrt(chi2(dof)/dof).
inline double draw_student_t(Rng& rng, double dof) {
    if (!(dof > 0.0)) {
        throw std::invalid_argument("draw_student_t: dof must be positive");
    }
    const double z = draw_normal(rng);
    const double v = draw_chi_squared(rng, dof);
    return z / std::sqrt(v / dof);
}

// Inverse-Gamma(shape, scale): reciprocal of Gamma(shape, rate = scale).
inline double draw_inverse_gamma(Rng& rng, double shape, double scale) {
    return 1.0 / draw_gamma(rng, shape, 1.0 / scale);
}

}  // namespace rpvbayes
