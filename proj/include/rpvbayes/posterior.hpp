#pragma once

// Conjugate posteriors for the two-part revenue model.
//
// Conversions: Beta prior on the conversion rate, updated with binomial
// counts. Transaction values: Normal likelihood with unknown mean and
// variance under a Normal-Inverse-Gamma prior; the marginal posterior of the
// mean is a non-standardized Student-t, which is what the engine samples.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rpvbayes/random.hpp"

namespace rpvbayes {

// Beta(alpha, beta) over a conversion rate. Defaults to the flat Beta(1,1).
struct BetaPosterior {
    double alpha = 1.0;  // pseudo-successes
    double beta = 1.0;   // pseudo-failures

    double mean() const { return alpha / (alpha + beta); }
    double variance() const {
        const double s = alpha + beta;
        return alpha * beta / (s * s * (s + 1.0));
    }
};

// Streaming sufficient statistics for transaction values. Additive, so daily
// batches can be pooled in any order.
struct ValueSummary {
    std::uint64_t count = 0;  // number of transactions
    double sum = 0.0;         // sum of values, currency
    double sum_sq = 0.0;      // sum of squared values, currency^2

    void add(double x) {
        ++count;
        sum += x;
        sum_sq += x * x;
    }

    ValueSummary& operator+=(const ValueSummary& other) {
        count += other.count;
        sum += other.sum;
        sum_sq += other.sum_sq;
        return *this;
    }

    double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }

    // Sum of squared deviations from the sample mean, clamped at zero to
    // absorb cancellation in the streaming sums.
    double ssd() const {
        if (count == 0) return 0.0;
        const double s = sum_sq - sum * sum / static_cast<double>(count);
        return s > 0.0 ? s : 0.0;
    }
};

// Normal-Inverse-Gamma over (mean, variance) of transaction values.
// Defaults are the weakly informative prior used throughout: location 100,
// one pseudo-observation, unit shape and scale.
struct NigPosterior {
    double mu = 100.0;      // location, currency
    double n_pseudo = 1.0;  // pseudo-observation count
    double alpha = 1.0;     // shape
    double beta = 1.0;      // scale, currency^2
};

// Marginal posterior of the mean order value.
struct StudentTParams {
    double dof;    // degrees of freedom
    double loc;    // location, currency
    double scale;  // scale, currency
};

inline BetaPosterior update_conversion(const BetaPosterior& prior, std::uint64_t k,
                                       std::uint64_t n) {
    if (k > n) {
        throw std::invalid_argument("update_conversion: conversions exceed visitors");
    }
    return {prior.alpha + static_cast<double>(k),
            prior.beta + static_cast<double>(n - k)};
}

// NIG update from pooled sufficient statistics:
//   mu'    = (n0*mu0 + k*xbar) / (n0 + k)
//   n'     = n0 + k
//   alpha' = alpha0 + k/2
//   beta'  = beta0 + SSD/2 + k*n0/(2*(n0+k)) * (xbar - mu0)^2
// Zero observations return the prior unchanged.
inline NigPosterior update_value(const NigPosterior& prior, const ValueSummary& data) {
    if (data.count == 0) return prior;
    const double k = static_cast<double>(data.count);
    const double xbar = data.mean();
    const double n_post = prior.n_pseudo + k;
    const double dev = xbar - prior.mu;
    return {
        (prior.n_pseudo * prior.mu + k * xbar) / n_post,
        n_post,
        prior.alpha + 0.5 * k,
        prior.beta + 0.5 * data.ssd() + (k * prior.n_pseudo / (2.0 * n_post)) * dev * dev,
    };
}

// Student-t marginal of the NIG mean: dof 2*alpha, location mu,
// scale sqrt(beta / (alpha * n)).
inline StudentTParams marginal_mean(const NigPosterior& post) {
    return {2.0 * post.alpha, post.mu,
            std::sqrt(post.beta / (post.alpha * post.n_pseudo))};
}

inline std::vector<double> sample_conversion(const BetaPosterior& post,
                                             std::size_t count, Rng& rng) {
    if (count == 0) {
        throw std::invalid_argument("sample_conversion: count must be positive");
    }
    std::vector<double> draws(count);
    for (auto& d : draws) d = draw_beta(rng, post.alpha, post.beta);
    return draws;
}

inline std::vector<double> sample_mean_value(const StudentTParams& t,
                                             std::size_t count, Rng& rng) {
    if (count == 0) {
        throw std::invalid_argument("sample_mean_value: count must be positive");
    }
    std::vector<double> draws(count);
    for (auto& d : draws) d = t.loc + t.scale * draw_student_t(rng, t.dof);
    return draws;
}

}  // namespace rpvbayes
