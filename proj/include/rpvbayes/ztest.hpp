#pragma once

// Peeking baseline: a two-proportion Z-test on conversion rate against the
// control, run on cumulative counts every day, stopping at the first
// significant result in the variant's favor.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rpvbayes/decision.hpp"

namespace rpvbayes {

// Standard normal CDF via erfc; accurate to well below 1e-7 over |z| <= 8.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

struct ZTestResult {
    double z = 0.0;
    double p_value = 1.0;  // two-sided
    std::size_t variant = 0;
};

// Pooled-variance two-proportion Z-test of group b against group a.
// Degenerate pooled rates (0 or 1) carry no evidence and return z=0, p=1.
inline ZTestResult two_proportion_z(std::uint64_t k_a, std::uint64_t n_a,
                                    std::uint64_t k_b, std::uint64_t n_b) {
    if (n_a == 0 || n_b == 0) {
        throw std::invalid_argument("two_proportion_z: sample sizes must be positive");
    }
    if (k_a > n_a || k_b > n_b) {
        throw std::invalid_argument("two_proportion_z: successes exceed trials");
    }
    const double pooled = static_cast<double>(k_a + k_b) / static_cast<double>(n_a + n_b);
    if (pooled <= 0.0 || pooled >= 1.0) {
        return {0.0, 1.0, 0};
    }
    const double rate_a = static_cast<double>(k_a) / static_cast<double>(n_a);
    const double rate_b = static_cast<double>(k_b) / static_cast<double>(n_b);
    const double se = std::sqrt(pooled * (1.0 - pooled) *
                                (1.0 / static_cast<double>(n_a) + 1.0 / static_cast<double>(n_b)));
    const double z = (rate_b - rate_a) / se;
    const double p = std::erfc(std::abs(z) / std::sqrt(2.0));  // 2*(1 - Phi(|z|))
    return {z, p, 0};
}

// One daily look: test every non-control variant against the control on
// cumulative counts. A variant is declared only when its observed conversion
// rate is strictly above the control's AND the directional (one-sided) tail
// probability of that advantage is below alpha; among qualifiers the smallest
// p-value (then lowest index) wins. The declaration is inherently one-sided:
// only an observed-better variant can ship, so the gate plus the one-sided
// tail IS the test at level alpha.
inline std::optional<std::size_t> peeking_step(const std::vector<VariantState>& states,
                                               double alpha, std::size_t control) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::invalid_argument("peeking_step: alpha must lie in (0, 1)");
    }
    if (control >= states.size()) {
        throw std::invalid_argument("peeking_step: control index out of range");
    }
    const auto& ctl = states[control];
    std::optional<std::size_t> winner;
    double best_p = alpha;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (i == control) continue;
        const auto r = two_proportion_z(ctl.conversions, ctl.visitors,
                                        states[i].conversions, states[i].visitors);
        const double ctl_rate =
            static_cast<double>(ctl.conversions) / static_cast<double>(ctl.visitors);
        const double var_rate =
            static_cast<double>(states[i].conversions) / static_cast<double>(states[i].visitors);
        // var_rate > ctl_rate forces z > 0, so the one-sided tail is half the
        // two-sided p-value.
        const double directional_p = 0.5 * r.p_value;
        if (directional_p < best_p && var_rate > ctl_rate) {
            best_p = directional_p;
            winner = i;
        }
    }
    return winner;
}

}  // namespace rpvbayes
