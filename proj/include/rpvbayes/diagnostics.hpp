#pragma once

// Posterior predictive checks: replicate full datasets from the fitted
// two-part posterior and locate the observed test statistic within the
// replicated distribution. Extreme p-values on either end flag misfit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rpvbayes/decision.hpp"
#include "rpvbayes/posterior.hpp"
#include "rpvbayes/random.hpp"

namespace rpvbayes {

enum class PpcStatistic { Mean, Variance, Max, ZeroFraction };

inline const char* to_string(PpcStatistic s) {
    switch (s) {
        case PpcStatistic::Mean: return "mean";
        case PpcStatistic::Variance: return "variance";
        case PpcStatistic::Max: return "max";
        default: return "zero_fraction";
    }
}

inline std::optional<PpcStatistic> parse_statistic(std::string_view name) {
    if (name == "mean") return PpcStatistic::Mean;
    if (name == "variance") return PpcStatistic::Variance;
    if (name == "max") return PpcStatistic::Max;
    if (name == "zero_fraction") return PpcStatistic::ZeroFraction;
    return std::nullopt;
}

struct PpcResult {
    std::string statistic_name;
    double observed_value = 0.0;
    std::vector<double> replicated_values;
    double ppc_p_value = 0.0;  // fraction of replicates >= observed
};

// zero_fraction reads the full per-visitor revenue vector (zeros for
// non-converters); the other statistics apply to transaction values alone.
// Degenerate inputs (no transactions, or fewer than two for variance) give 0.
inline double ppc_statistic_value(PpcStatistic stat, const std::vector<double>& transactions,
                                  std::uint64_t visitors) {
    switch (stat) {
        case PpcStatistic::ZeroFraction:
            return static_cast<double>(visitors - transactions.size()) /
                   static_cast<double>(visitors);
        case PpcStatistic::Max:
            if (transactions.empty()) return 0.0;
            return *std::max_element(transactions.begin(), transactions.end());
        case PpcStatistic::Mean: {
            if (transactions.empty()) return 0.0;
            double sum = 0.0;
            for (double x : transactions) sum += x;
            return sum / static_cast<double>(transactions.size());
        }
        case PpcStatistic::Variance: {
            if (transactions.size() < 2) return 0.0;
            double sum = 0.0;
            for (double x : transactions) sum += x;
            const double mean = sum / static_cast<double>(transactions.size());
            double ssd = 0.0;
            for (double x : transactions) ssd += (x - mean) * (x - mean);
            return ssd / static_cast<double>(transactions.size() - 1);
        }
    }
    return 0.0;
}

namespace detail {

inline bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace detail

// Simulates `replicates` datasets of state.visitors synthetic visitors from
// the joint posterior: p from the Beta posterior; (mu, sigma^2) from the NIG
// posterior (sigma^2 from its Inverse-Gamma marginal, mu conditionally
// Normal). Each converted visitor contributes one Normal(mu, sigma)
// transaction; negative draws are kept, since exposing that artifact of the
// Normal likelihood against all-positive data is the point of the check.
inline PpcResult posterior_predictive_check(const VariantState& state,
                                            const std::vector<double>& observed_transactions,
                                            PpcStatistic statistic, std::size_t replicates,
                                            Rng& rng) {
    if (replicates < 1) {
        throw std::invalid_argument("posterior_predictive_check: replicates must be >= 1");
    }
    validate_state(state);
    if (state.visitors == 0) {
        throw std::invalid_argument("posterior_predictive_check: state has no visitors");
    }
    if (observed_transactions.size() != state.values.count) {
        throw std::invalid_argument(
            "posterior_predictive_check: observed transactions do not match recorded count");
    }
    double obs_sum = 0.0, obs_sum_sq = 0.0;
    for (double x : observed_transactions) {
        obs_sum += x;
        obs_sum_sq += x * x;
    }
    if (!detail::close_rel(obs_sum, state.values.sum, 1e-6) ||
        !detail::close_rel(obs_sum_sq, state.values.sum_sq, 1e-6)) {
        throw std::invalid_argument(
            "posterior_predictive_check: observed transactions do not match recorded summary");
    }

    const BetaPosterior conv = state.conversion_posterior();
    const NigPosterior value = state.value_posterior();

    PpcResult result;
    result.statistic_name = to_string(statistic);
    result.observed_value = ppc_statistic_value(statistic, observed_transactions, state.visitors);
    result.replicated_values.reserve(replicates);

    std::vector<double> rep;
    std::size_t at_or_above = 0;
    for (std::size_t r = 0; r < replicates; ++r) {
        const double p = draw_beta(rng, conv.alpha, conv.beta);
        const double sigma_sq = draw_inverse_gamma(rng, value.alpha, value.beta);
        const double mu = value.mu + std::sqrt(sigma_sq / value.n_pseudo) * draw_normal(rng);
        const double sigma = std::sqrt(sigma_sq);

        rep.clear();
        for (std::uint64_t v = 0; v < state.visitors; ++v) {
            if (draw_bernoulli(rng, p)) rep.push_back(mu + sigma * draw_normal(rng));
        }
        const double t = ppc_statistic_value(statistic, rep, state.visitors);
        result.replicated_values.push_back(t);
        if (t >= result.observed_value) ++at_or_above;
    }
    result.ppc_p_value =
        static_cast<double>(at_or_above) / static_cast<double>(replicates);
    return result;
}

}  // namespace rpvbayes
