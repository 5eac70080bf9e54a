#pragma once

// Simulation harness: synthetic daily traffic from scenario ground truth,
// the day-by-day monitoring loop for both methodologies, and aggregation of
// many runs into summary metrics.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rpvbayes/decision.hpp"
#include "rpvbayes/posterior.hpp"
#include "rpvbayes/random.hpp"
#include "rpvbayes/ztest.hpp"

namespace rpvbayes {

struct VariantTruth {
    double conv_rate = 0.0;  // true conversion probability
    double aov = 0.0;        // true mean order value, currency
    double aov_std = 0.0;    // order value standard deviation, currency

    double rpv() const { return conv_rate * aov; }
};

struct ScenarioConfig {
    std::string name;
    std::uint64_t daily_visitors = 0;  // total across variants
    int max_days = 200;
    std::vector<VariantTruth> variants;
    std::size_t control = 0;
    // Correct terminal decision: a specific winning variant, or (when unset)
    // shipping nothing, i.e. futility or timeout.
    std::optional<std::size_t> correct_winner;
};

inline void validate_scenario(const ScenarioConfig& sc) {
    if (sc.variants.empty()) throw std::invalid_argument("scenario: no variants");
    if (sc.control >= sc.variants.size()) {
        throw std::invalid_argument("scenario: control index out of range");
    }
    if (sc.daily_visitors == 0) {
        throw std::invalid_argument("scenario: daily_visitors must be positive");
    }
    if (sc.max_days < 1) throw std::invalid_argument("scenario: max_days must be positive");
    for (std::size_t i = 0; i < sc.variants.size(); ++i) {
        const auto& v = sc.variants[i];
        if (v.conv_rate < 0.0 || v.conv_rate >= 1.0) {
            throw std::invalid_argument("variant " + std::to_string(i) +
                                        ": conv_rate must lie in [0, 1)");
        }
        if (!(v.aov > 0.0) || !(v.aov_std > 0.0)) {
            throw std::invalid_argument("variant " + std::to_string(i) +
                                        ": aov and aov_std must be positive");
        }
    }
    if (sc.correct_winner) {
        if (*sc.correct_winner >= sc.variants.size() || *sc.correct_winner == sc.control) {
            throw std::invalid_argument("scenario: correct_winner must name a non-control variant");
        }
    }
}

struct EngineConfig {
    double epsilon = 0.01;            // expected-loss stopping threshold, currency
    std::size_t sample_count = 20000; // Monte Carlo samples S
    double alpha = 0.05;              // peeking significance level
    int min_days = 1;                 // first day either method may stop
    std::uint64_t seed = 42;
    BetaPosterior conv_prior;         // applied to every variant...
    NigPosterior value_prior;
    std::vector<BetaPosterior> conv_priors;  // ...unless per-variant priors are given
    std::vector<NigPosterior> value_priors;
};

inline void validate_engine(const EngineConfig& cfg, std::size_t variant_count) {
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("engine: epsilon must be positive");
    if (cfg.sample_count == 0) throw std::invalid_argument("engine: sample_count must be positive");
    if (!(cfg.alpha > 0.0) || !(cfg.alpha < 1.0)) {
        throw std::invalid_argument("engine: alpha must lie in (0, 1)");
    }
    if (cfg.min_days < 1) throw std::invalid_argument("engine: min_days must be positive");
    if (!cfg.conv_priors.empty() && cfg.conv_priors.size() != variant_count) {
        throw std::invalid_argument("engine: per-variant conversion priors do not match variant count");
    }
    if (!cfg.value_priors.empty() && cfg.value_priors.size() != variant_count) {
        throw std::invalid_argument("engine: per-variant value priors do not match variant count");
    }
}

enum class Method { Bayesian, Peeking };

inline const char* to_string(Method m) {
    return m == Method::Bayesian ? "bayesian" : "peeking";
}

enum class OutcomeKind { Winner, Futility, TimedOut };

inline const char* to_string(OutcomeKind o) {
    switch (o) {
        case OutcomeKind::Winner: return "winner";
        case OutcomeKind::Futility: return "futility";
        default: return "timed_out";
    }
}

struct RunRecord {
    std::uint64_t run_id = 0;
    Method method = Method::Bayesian;
    OutcomeKind outcome = OutcomeKind::TimedOut;
    std::size_t winner = 0;            // meaningful only when outcome == Winner
    int duration_days = 0;
    std::vector<double> final_losses;  // bayesian only; last evaluated losses
    std::uint64_t data_seed = 0;       // derived seed of the shared data stream
};

struct DailyBatch {
    std::uint64_t visitors = 0;
    std::uint64_t conversions = 0;
    ValueSummary values;
};

// Moment-matched Gamma parameters: shape = (mean/std)^2, scale = std^2/mean,
// so the distribution reproduces the requested mean and standard deviation.
inline std::pair<double, double> gamma_params_from_moments(double mean, double std_dev) {
    if (!(mean > 0.0) || !(std_dev > 0.0)) {
        throw std::invalid_argument("gamma_params_from_moments: mean and std must be positive");
    }
    const double ratio = mean / std_dev;
    return {ratio * ratio, std_dev * std_dev / mean};
}

// One day of synthetic traffic. Visitors are split evenly with the remainder
// going to the lowest indices; each visitor converts by a Bernoulli draw and
// each conversion contributes one Gamma-distributed transaction.
inline std::vector<DailyBatch> simulate_day(const ScenarioConfig& sc, Rng& rng) {
    validate_scenario(sc);
    const std::size_t n = sc.variants.size();
    std::vector<DailyBatch> batches(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& truth = sc.variants[i];
        auto& batch = batches[i];
        batch.visitors = sc.daily_visitors / n + (i < sc.daily_visitors % n ? 1 : 0);
        if (truth.conv_rate <= 0.0) continue;
        const auto [shape, scale] = gamma_params_from_moments(truth.aov, truth.aov_std);
        for (std::uint64_t v = 0; v < batch.visitors; ++v) {
            if (draw_bernoulli(rng, truth.conv_rate)) {
                ++batch.conversions;
                batch.values.add(draw_gamma(rng, shape, scale));
            }
        }
    }
    return batches;
}

inline std::vector<VariantState> make_variant_states(const ScenarioConfig& sc,
                                                     const EngineConfig& cfg) {
    std::vector<VariantState> states(sc.variants.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        states[i].id = i;
        states[i].conv_prior = cfg.conv_priors.empty() ? cfg.conv_prior : cfg.conv_priors[i];
        states[i].value_prior = cfg.value_priors.empty() ? cfg.value_prior : cfg.value_priors[i];
    }
    return states;
}

// One complete experiment: simulate daily batches, accumulate, and evaluate
// the chosen methodology until it stops or the scenario times out.
//
// Seeds derive from (cfg.seed, run_id) with separate data and analysis
// streams, so both methods observe the identical data trajectory for a given
// run id and records do not depend on scheduling or on how many other runs
// execute.
inline RunRecord run_experiment(const ScenarioConfig& sc, Method method,
                                const EngineConfig& cfg, std::uint64_t run_id) {
    validate_scenario(sc);
    validate_engine(cfg, sc.variants.size());

    RunRecord rec;
    rec.run_id = run_id;
    rec.method = method;
    rec.data_seed = derive_seed(cfg.seed, run_id, kDataStream);

    Rng data_rng(rec.data_seed);
    Rng analysis_rng(derive_seed(cfg.seed, run_id, kAnalysisStream));
    auto states = make_variant_states(sc, cfg);

    for (int day = 1; day <= sc.max_days; ++day) {
        const auto batches = simulate_day(sc, data_rng);
        for (std::size_t i = 0; i < states.size(); ++i) {
            states[i].visitors += batches[i].visitors;
            states[i].conversions += batches[i].conversions;
            states[i].values += batches[i].values;
        }
        if (day < cfg.min_days) continue;

        if (method == Method::Bayesian) {
            const auto m = derive_rpv_samples(states, cfg.sample_count, analysis_rng);
            const auto losses = compute_expected_loss(m);
            const auto pbb = compute_pbb(m);
            const auto d = decide(losses, pbb, cfg.epsilon, sc.control, day);
            rec.final_losses = losses;
            if (d.verdict == Verdict::StopWinner) {
                rec.outcome = OutcomeKind::Winner;
                rec.winner = d.winner;
                rec.duration_days = day;
                return rec;
            }
            if (d.verdict == Verdict::StopFutility) {
                rec.outcome = OutcomeKind::Futility;
                rec.duration_days = day;
                return rec;
            }
        } else {
            if (const auto w = peeking_step(states, cfg.alpha, sc.control)) {
                rec.outcome = OutcomeKind::Winner;
                rec.winner = *w;
                rec.duration_days = day;
                return rec;
            }
        }
    }
    rec.outcome = OutcomeKind::TimedOut;
    rec.duration_days = sc.max_days;
    return rec;
}

inline bool is_correct_decision(const RunRecord& rec, const ScenarioConfig& sc) {
    if (sc.correct_winner) {
        return rec.outcome == OutcomeKind::Winner && rec.winner == *sc.correct_winner;
    }
    return rec.outcome == OutcomeKind::Futility || rec.outcome == OutcomeKind::TimedOut;
}

// Per-method tallies over a study. Average duration covers decided runs
// (winner or futility) only; timed-out runs never reached a conclusion and
// would otherwise swamp the statistic at max_days.
struct MethodAggregate {
    std::size_t runs = 0;
    std::vector<std::size_t> winner_counts;  // per variant
    std::size_t futility_count = 0;
    std::size_t timed_out_count = 0;
    std::size_t correct_count = 0;
    std::size_t decided_count = 0;
    std::uint64_t decided_duration_sum = 0;

    void add(const RunRecord& rec, const ScenarioConfig& sc) {
        if (winner_counts.empty()) winner_counts.resize(sc.variants.size(), 0);
        ++runs;
        switch (rec.outcome) {
            case OutcomeKind::Winner: ++winner_counts[rec.winner]; break;
            case OutcomeKind::Futility: ++futility_count; break;
            case OutcomeKind::TimedOut: ++timed_out_count; break;
        }
        if (rec.outcome != OutcomeKind::TimedOut) {
            ++decided_count;
            decided_duration_sum += static_cast<std::uint64_t>(rec.duration_days);
        }
        if (is_correct_decision(rec, sc)) ++correct_count;
    }

    double pct(std::size_t count) const {
        return runs == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(runs);
    }
    double winner_pct(std::size_t i) const { return pct(winner_counts[i]); }
    double futility_pct() const { return pct(futility_count); }
    double timed_out_pct() const { return pct(timed_out_count); }
    double correct_pct() const { return pct(correct_count); }
    double avg_duration_days() const {
        if (decided_count == 0) return std::numeric_limits<double>::quiet_NaN();
        return static_cast<double>(decided_duration_sum) / static_cast<double>(decided_count);
    }
};

struct AggregateReport {
    std::string scenario;
    std::size_t n_runs = 0;
    MethodAggregate bayesian;
    MethodAggregate peeking;
};

struct StudyResult {
    AggregateReport report;
    std::vector<RunRecord> records;  // ordered by run id, bayesian then peeking
};

// Runs n_runs paired experiments (both methods on identical data streams).
// Work may be spread over several threads; per-run seed derivation makes the
// result identical regardless of job count.
inline StudyResult run_study(const ScenarioConfig& sc, const EngineConfig& cfg,
                             std::size_t n_runs, unsigned jobs = 1) {
    if (n_runs == 0) throw std::invalid_argument("run_study: n_runs must be positive");
    validate_scenario(sc);
    validate_engine(cfg, sc.variants.size());

    StudyResult result;
    result.records.resize(2 * n_runs);

    auto worker = [&](std::atomic<std::uint64_t>& next) {
        for (;;) {
            const std::uint64_t run_id = next.fetch_add(1);
            if (run_id >= n_runs) break;
            result.records[2 * run_id] = run_experiment(sc, Method::Bayesian, cfg, run_id);
            result.records[2 * run_id + 1] = run_experiment(sc, Method::Peeking, cfg, run_id);
        }
    };

    std::atomic<std::uint64_t> next{0};
    const unsigned thread_count =
        std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n_runs)));
    if (thread_count == 1) {
        worker(next);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(thread_count);
        for (unsigned t = 0; t < thread_count; ++t) threads.emplace_back(worker, std::ref(next));
        for (auto& t : threads) t.join();
    }

    result.report.scenario = sc.name;
    result.report.n_runs = n_runs;
    for (const auto& rec : result.records) {
        (rec.method == Method::Bayesian ? result.report.bayesian : result.report.peeking)
            .add(rec, sc);
    }
    return result;
}

// Built-in scenario presets matching the three benchmark studies.
inline ScenarioConfig preset_scenario(const std::string& name) {
    ScenarioConfig sc;
    sc.name = name;
    if (name == "revenue-trap") {
        sc.daily_visitors = 4000;
        sc.variants = {{0.030, 100.0, 40.0}, {0.032, 90.0, 35.0}};
        sc.correct_winner = std::nullopt;  // the trap variant must not ship
    } else if (name == "clear-winner") {
        sc.daily_visitors = 4000;
        sc.variants = {{0.030, 100.0, 40.0},
                       {0.029, 100.0, 40.0},
                       {0.031, 105.0, 45.0},
                       {0.030, 100.0, 40.0}};
        sc.correct_winner = 2;
    } else if (name == "futility") {
        sc.daily_visitors = 3000;
        sc.variants = {{0.030, 100.0, 40.0}, {0.0301, 100.0, 40.0}, {0.030, 100.2, 40.0}};
        sc.correct_winner = std::nullopt;
    } else {
        throw std::invalid_argument("unknown scenario preset: " + name +
                                    " (expected revenue-trap, clear-winner, or futility)");
    }
    return sc;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"revenue-trap", "clear-winner", "futility"};
    return names;
}

}  // namespace rpvbayes
