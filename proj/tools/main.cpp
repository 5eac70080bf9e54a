// Command-line front end: study execution over configured or preset
// scenarios, one-shot decision evaluation from saved aggregates, and
// posterior predictive checks.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rpvbayes/config.hpp"
#include "rpvbayes/decision.hpp"
#include "rpvbayes/diagnostics.hpp"
#include "rpvbayes/posterior.hpp"
#include "rpvbayes/random.hpp"
#include "rpvbayes/report.hpp"
#include "rpvbayes/simulate.hpp"
#include "rpvbayes/version.hpp"
#include "rpvbayes/ztest.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rpvbayes;

struct StudyOverrides {
    std::optional<std::size_t> n_runs;
    std::optional<std::size_t> samples;
    std::optional<double> epsilon;
    std::optional<int> max_days;
    std::optional<double> alpha;
    std::optional<int> min_days;
    std::optional<std::uint64_t> seed;
};

void apply_overrides(StudySpec& spec, const StudyOverrides& ov) {
    if (ov.n_runs) spec.n_runs = *ov.n_runs;
    if (ov.samples) spec.engine.sample_count = *ov.samples;
    if (ov.epsilon) spec.engine.epsilon = *ov.epsilon;
    if (ov.alpha) spec.engine.alpha = *ov.alpha;
    if (ov.min_days) spec.engine.min_days = *ov.min_days;
    if (ov.seed) spec.engine.seed = *ov.seed;
    if (ov.max_days) {
        for (auto& sc : spec.scenarios) sc.config.max_days = *ov.max_days;
    }
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-identical across platforms
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

// Desk-scale defaults for preset runs; config files fall back to the full
// engine defaults unless they say otherwise.
StudySpec preset_study(const std::string& name) {
    StudySpec spec;
    spec.n_runs = 500;
    spec.engine.sample_count = 5000;
    spec.scenarios.push_back({preset_scenario(name), {}, {}});
    return spec;
}

int cmd_run_study(const std::string& config_path, const std::string& preset,
                  const StudyOverrides& overrides, const fs::path& output_dir, unsigned jobs) {
    StudySpec spec = preset.empty() ? load_study_spec(config_path) : preset_study(preset);
    apply_overrides(spec, overrides);
    validate_study(spec);

    fs::create_directories(output_dir);
    const auto start = std::chrono::steady_clock::now();

    for (const auto& sc : spec.scenarios) {
        const auto result = run_study(sc.config, spec.engine_for(sc), spec.n_runs, jobs);

        auto runs_csv = open_output(output_dir / (sc.config.name + "_runs.csv"));
        write_run_records_csv(runs_csv, result.records);

        auto agg_csv = open_output(output_dir / (sc.config.name + "_aggregate.csv"));
        write_aggregate_csv(agg_csv, result.report);

        auto agg_txt = open_output(output_dir / (sc.config.name + "_aggregate.txt"));
        write_aggregate_text(agg_txt, result.report, sc.config);
        write_aggregate_text(std::cout, result.report, sc.config);
        std::cout << '\n';
    }

    auto echo = open_output(output_dir / "config_echo.ini");
    write_study_spec(echo, spec);

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    auto meta = open_output(output_dir / "metadata.txt");
    meta << "tool = " << kToolName << " " << kVersion << "\n";
    meta << "seed = " << spec.engine.seed << "\n";
    meta << "jobs = " << jobs << "\n";
    meta << "wall_clock_seconds = " << format_fixed(elapsed.count(), 3) << "\n";
    meta << "config_echo = config_echo.ini\n";

    std::cout << "wrote " << output_dir.string() << " ("
              << format_fixed(elapsed.count(), 1) << "s)\n";
    return 0;
}

int cmd_evaluate(const std::string& state_path, std::uint64_t seed) {
    const StateFile sf = load_state_file(state_path);
    for (const auto& st : sf.states) validate_state(st);

    Rng rng(derive_seed(seed, 0, kAnalysisStream));
    const auto matrix = derive_rpv_samples(sf.states, sf.sample_count, rng);
    const auto losses = compute_expected_loss(matrix);
    const auto pbb = compute_pbb(matrix);
    const auto decision = decide(losses, pbb, sf.epsilon, sf.control, 1);

    std::cout << "epsilon " << format_currency(sf.epsilon) << ", samples " << sf.sample_count
              << ", seed " << seed << "\n\n";
    std::cout << "variant    visitors  conversions  conv mean     t dof      t loc    t scale"
                 "    P(best)    E[loss]\n";
    for (std::size_t i = 0; i < sf.states.size(); ++i) {
        const auto& st = sf.states[i];
        const auto conv = st.conversion_posterior();
        const auto t = marginal_mean(st.value_posterior());
        char line[256];
        std::snprintf(line, sizeof(line),
                      "%-9s %10llu %12llu %10.5f %9.1f %10.4f %10.4f %10.4f %10.4f\n",
                      (variant_label(i) + (i == sf.control ? "*" : "")).c_str(),
                      static_cast<unsigned long long>(st.visitors),
                      static_cast<unsigned long long>(st.conversions), conv.mean(), t.dof, t.loc,
                      t.scale, pbb[i], losses[i]);
        std::cout << line;
    }
    std::cout << "\n";
    switch (decision.verdict) {
        case Verdict::StopWinner:
            std::cout << "verdict: stop, ship variant " << variant_label(decision.winner) << "\n";
            break;
        case Verdict::StopFutility:
            std::cout << "verdict: stop for futility, keep control\n";
            break;
        case Verdict::Continue:
            std::cout << "verdict: continue collecting data\n";
            break;
    }
    return 0;
}

int cmd_ppc(const std::string& state_path, const std::string& transactions_path,
            const std::string& statistic_name, std::size_t replicates, std::size_t variant,
            std::uint64_t seed) {
    const auto statistic = parse_statistic(statistic_name);
    if (!statistic) {
        std::cerr << "error: unknown statistic '" << statistic_name
                  << "' (valid: mean, variance, max, zero_fraction)\n";
        return 1;
    }
    const StateFile sf = load_state_file(state_path);
    if (variant >= sf.states.size()) {
        std::cerr << "error: variant " << variant << " not present in " << state_path << "\n";
        return 1;
    }
    const auto observed = load_transactions(transactions_path);

    Rng rng(derive_seed(seed, variant, kReplicateStream));
    const auto result =
        posterior_predictive_check(sf.states[variant], observed, *statistic, replicates, rng);

    auto sorted = result.replicated_values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t r = sorted.size();
    const double median =
        r % 2 ? sorted[r / 2] : 0.5 * (sorted[r / 2 - 1] + sorted[r / 2]);

    std::cout << "variant " << variant_label(variant) << ": visitors " << sf.states[variant].visitors
              << ", transactions " << observed.size() << "\n";
    std::cout << "statistic " << result.statistic_name << ": observed "
              << format_fixed(result.observed_value, 4) << "\n";
    std::cout << "replicates " << r << ": min " << format_fixed(sorted.front(), 4) << ", median "
              << format_fixed(median, 4) << ", max " << format_fixed(sorted.back(), 4) << "\n";
    std::cout << "ppc_p_value = " << format_fixed(result.ppc_p_value, 4) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kToolName) +
                 ": Bayesian revenue-per-visitor decisions for A/B/n experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);

    // Fixed default keeps every invocation reproducible; no entropy anywhere.
    std::uint64_t seed = 42;
    unsigned jobs = 1;
    std::string output_dir = ".";
    auto* seed_opt = app.add_option("--seed", seed, "base seed (default 42, never entropy)");
    app.add_option("--jobs", jobs, "worker threads (does not affect results)")
        ->check(CLI::Range(1u, 256u));
    app.add_option("--output", output_dir, "output directory for run-study");

    auto* run = app.add_subcommand("run-study", "simulate studies and write report files");
    std::string config_path, preset;
    auto* config_opt = run->add_option("--config", config_path, "study config file");
    auto* preset_opt = run->add_option("--preset", preset, "built-in scenario")
                           ->check(CLI::IsMember(preset_names()));
    config_opt->excludes(preset_opt);
    preset_opt->excludes(config_opt);
    StudyOverrides ov;
    run->add_option("--n-runs", ov.n_runs, "simulated experiments per scenario");
    run->add_option("--samples", ov.samples, "Monte Carlo samples per decision");
    run->add_option("--epsilon", ov.epsilon, "expected-loss stopping threshold");
    run->add_option("--max-days", ov.max_days, "timeout horizon for every scenario");
    run->add_option("--alpha", ov.alpha, "peeking significance level");
    run->add_option("--min-days", ov.min_days, "earliest day either method may stop");

    auto* eval = app.add_subcommand("evaluate", "one decision from saved cumulative state");
    std::string state_path;
    eval->add_option("state", state_path, "state file")->required();

    auto* ppc = app.add_subcommand("ppc", "posterior predictive check for one variant");
    std::string ppc_state, transactions_path, statistic_name = "mean";
    std::size_t replicates = 200, variant = 0;
    ppc->add_option("state", ppc_state, "state file")->required();
    ppc->add_option("transactions", transactions_path, "observed transaction values")->required();
    ppc->add_option("--statistic", statistic_name, "mean, variance, max, or zero_fraction");
    ppc->add_option("--replicates", replicates, "number of replicated datasets");
    ppc->add_option("--variant", variant, "variant index within the state file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (config_path.empty() && preset.empty()) {
                std::cerr << "error: run-study needs --config <path> or --preset <name>\n";
                return 1;
            }
            if (seed_opt->count() > 0) ov.seed = seed;
            return cmd_run_study(config_path, preset, ov, output_dir, jobs);
        }
        if (eval->parsed()) return cmd_evaluate(state_path, seed);
        if (ppc->parsed()) {
            return cmd_ppc(ppc_state, transactions_path, statistic_name, replicates, variant,
                           seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
