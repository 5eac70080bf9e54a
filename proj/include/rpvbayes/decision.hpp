#pragma once

// Decision engine: per-variant RPV posteriors via paired Monte Carlo draws,
// Probability to Be Best, Expected Loss, and the stop/continue rule.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rpvbayes/posterior.hpp"
#include "rpvbayes/random.hpp"

namespace rpvbayes {

// Cumulative observed data plus priors for one variant. The monitoring loop
// accumulates into this and recomputes posteriors from the totals each day.
struct VariantState {
    std::size_t id = 0;             // 0 = control
    std::uint64_t visitors = 0;     // cumulative n
    std::uint64_t conversions = 0;  // cumulative k
    ValueSummary values;            // one transaction per conversion
    BetaPosterior conv_prior;
    NigPosterior value_prior;

    BetaPosterior conversion_posterior() const {
        return update_conversion(conv_prior, conversions, visitors);
    }
    NigPosterior value_posterior() const {
        return update_value(value_prior, values);
    }
};

inline void validate_state(const VariantState& s) {
    if (s.conversions > s.visitors) {
        throw std::invalid_argument("variant " + std::to_string(s.id) +
                                    ": conversions exceed visitors");
    }
    if (s.values.count != s.conversions) {
        throw std::invalid_argument("variant " + std::to_string(s.id) +
                                    ": transaction count does not match conversions");
    }
}

// S x N matrix of paired RPV draws: row s, column i is the product of the
// s-th conversion-rate draw and the s-th mean-value draw for variant i.
struct RpvSampleMatrix {
    std::vector<double> samples;  // row-major, sample_count * variant_count
    std::size_t sample_count = 0;
    std::size_t variant_count = 0;

    double at(std::size_t s, std::size_t i) const { return samples[s * variant_count + i]; }
    double& at(std::size_t s, std::size_t i) { return samples[s * variant_count + i]; }
};

enum class Verdict { Continue, StopWinner, StopFutility };

struct Decision {
    Verdict verdict = Verdict::Continue;
    std::size_t winner = 0;  // meaningful only for StopWinner
    std::vector<double> expected_losses;
    std::vector<double> pbb;
    int day = 1;
};

// Updates each variant's posteriors from its cumulative data, draws S
// conversion-rate and S mean-value samples per variant, and pairs them
// element-wise into RPV draws.
inline RpvSampleMatrix derive_rpv_samples(const std::vector<VariantState>& states,
                                          std::size_t sample_count, Rng& rng) {
    if (states.empty()) {
        throw std::invalid_argument("derive_rpv_samples: no variants");
    }
    if (sample_count == 0) {
        throw std::invalid_argument("derive_rpv_samples: sample_count must be positive");
    }
    RpvSampleMatrix m;
    m.sample_count = sample_count;
    m.variant_count = states.size();
    m.samples.resize(sample_count * states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        validate_state(states[i]);
        const auto conv = states[i].conversion_posterior();
        const auto t = marginal_mean(states[i].value_posterior());
        const auto p = sample_conversion(conv, sample_count, rng);
        const auto mu = sample_mean_value(t, sample_count, rng);
        for (std::size_t s = 0; s < sample_count; ++s) {
            m.at(s, i) = p[s] * mu[s];
        }
    }
    return m;
}

// Fraction of rows where each column is the row maximum. Ties go to the
// lowest index, so every row is awarded to exactly one variant and the
// counts partition the sample count.
inline std::vector<double> compute_pbb(const RpvSampleMatrix& m) {
    std::vector<std::size_t> wins(m.variant_count, 0);
    for (std::size_t s = 0; s < m.sample_count; ++s) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < m.variant_count; ++i) {
            if (m.at(s, i) > m.at(s, best)) best = i;
        }
        ++wins[best];
    }
    std::vector<double> pbb(m.variant_count);
    for (std::size_t i = 0; i < m.variant_count; ++i) {
        pbb[i] = static_cast<double>(wins[i]) / static_cast<double>(m.sample_count);
    }
    return pbb;
}

// Expected opportunity loss of deploying each variant: the mean over rows of
// (row maximum - variant's draw). The row maximum is shared across columns.
inline std::vector<double> compute_expected_loss(const RpvSampleMatrix& m) {
    std::vector<double> loss(m.variant_count, 0.0);
    for (std::size_t s = 0; s < m.sample_count; ++s) {
        double row_max = m.at(s, 0);
        for (std::size_t i = 1; i < m.variant_count; ++i) {
            if (m.at(s, i) > row_max) row_max = m.at(s, i);
        }
        for (std::size_t i = 0; i < m.variant_count; ++i) {
            loss[i] += row_max - m.at(s, i);
        }
    }
    for (auto& l : loss) l /= static_cast<double>(m.sample_count);
    return loss;
}

// Stopping rule: find the minimum-loss variant (ties broken in favor of the
// control, then the lowest index). Below epsilon, stop: futility when the
// control is minimal, otherwise declare the winner. Otherwise continue.
inline Decision decide(const std::vector<double>& losses, const std::vector<double>& pbb,
                       double epsilon, std::size_t control, int day) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("decide: epsilon must be positive");
    }
    if (control >= losses.size()) {
        throw std::invalid_argument("decide: control index out of range");
    }
    std::size_t best = control;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        if (losses[i] < losses[best]) best = i;
    }
    Decision d;
    d.expected_losses = losses;
    d.pbb = pbb;
    d.day = day;
    if (losses[best] < epsilon) {
        if (best == control) {
            d.verdict = Verdict::StopFutility;
        } else {
            d.verdict = Verdict::StopWinner;
            d.winner = best;
        }
    } else {
        d.verdict = Verdict::Continue;
    }
    return d;
}

}  // namespace rpvbayes
