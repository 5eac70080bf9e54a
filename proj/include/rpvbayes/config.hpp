#pragma once

// Structured-text configuration: sectioned key=value files for study
// definitions and for saved experiment state (evaluate/ppc inputs), plus an
// echo writer whose output parses back to the identical configuration.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rpvbayes/decision.hpp"
#include "rpvbayes/posterior.hpp"
#include "rpvbayes/simulate.hpp"

namespace rpvbayes {

class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& path, int line, const std::string& message)
        : std::runtime_error(line > 0 ? path + ":" + std::to_string(line) + ": " + message
                                      : path + ": " + message) {}
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

struct ParseContext {
    std::string path;
    int line = 0;

    [[noreturn]] void fail(const std::string& message) const {
        throw ConfigError(path, line, message);
    }
};

inline double parse_real(std::string_view tok, const ParseContext& ctx) {
    double v = 0.0;
    const auto* end = tok.data() + tok.size();
    const auto res = std::from_chars(tok.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        ctx.fail("expected a number, got '" + std::string(tok) + "'");
    }
    return v;
}

inline std::uint64_t parse_u64(std::string_view tok, const ParseContext& ctx) {
    std::uint64_t v = 0;
    const auto* end = tok.data() + tok.size();
    const auto res = std::from_chars(tok.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        ctx.fail("expected a nonnegative integer, got '" + std::string(tok) + "'");
    }
    return v;
}

inline std::vector<double> parse_reals(std::string_view value, std::size_t n,
                                       const ParseContext& ctx) {
    const auto toks = split_tokens(value);
    if (toks.size() != n) {
        ctx.fail("expected " + std::to_string(n) + " numbers, got " +
                 std::to_string(toks.size()));
    }
    std::vector<double> out;
    out.reserve(n);
    for (const auto& t : toks) out.push_back(parse_real(t, ctx));
    return out;
}

// Shortest decimal that round-trips, so echoed configs reparse bit-exactly.
inline std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline bool valid_name(std::string_view name) {
    if (name.empty()) return false;
    for (char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') {
            return false;
        }
    }
    return true;
}

}  // namespace detail

// One scenario as configured, with optional per-variant prior overrides that
// replace the engine-level defaults for this scenario only.
struct ScenarioSpec {
    ScenarioConfig config;
    std::map<std::size_t, BetaPosterior> conv_prior_overrides;
    std::map<std::size_t, NigPosterior> value_prior_overrides;
};

struct StudySpec {
    EngineConfig engine;
    std::size_t n_runs = 500;
    std::vector<ScenarioSpec> scenarios;

    EngineConfig engine_for(const ScenarioSpec& spec) const {
        EngineConfig cfg = engine;
        const std::size_t n = spec.config.variants.size();
        if (!spec.conv_prior_overrides.empty()) {
            cfg.conv_priors.assign(n, engine.conv_prior);
            for (const auto& [i, p] : spec.conv_prior_overrides) cfg.conv_priors.at(i) = p;
        }
        if (!spec.value_prior_overrides.empty()) {
            cfg.value_priors.assign(n, engine.value_prior);
            for (const auto& [i, p] : spec.value_prior_overrides) cfg.value_priors.at(i) = p;
        }
        return cfg;
    }
};

inline void validate_study(const StudySpec& spec) {
    if (spec.n_runs == 0) throw std::invalid_argument("study: n_runs must be positive");
    if (spec.scenarios.empty()) throw std::invalid_argument("study: no scenarios defined");
    for (const auto& sc : spec.scenarios) {
        validate_scenario(sc.config);
        const std::size_t n = sc.config.variants.size();
        for (const auto& [i, p] : sc.conv_prior_overrides) {
            (void)p;
            if (i >= n) {
                throw std::invalid_argument("scenario " + sc.config.name + ": conv_prior_" +
                                            std::to_string(i) + " names no variant");
            }
        }
        for (const auto& [i, p] : sc.value_prior_overrides) {
            (void)p;
            if (i >= n) {
                throw std::invalid_argument("scenario " + sc.config.name + ": value_prior_" +
                                            std::to_string(i) + " names no variant");
            }
        }
        validate_engine(spec.engine_for(sc), n);
    }
    for (std::size_t a = 0; a < spec.scenarios.size(); ++a) {
        for (std::size_t b = a + 1; b < spec.scenarios.size(); ++b) {
            if (spec.scenarios[a].config.name == spec.scenarios[b].config.name) {
                throw std::invalid_argument("study: duplicate scenario name " +
                                            spec.scenarios[a].config.name);
            }
        }
    }
}

inline StudySpec parse_study_spec(std::istream& in, const std::string& path) {
    StudySpec spec;
    detail::ParseContext ctx{path, 0};

    enum class Section { None, Engine, Scenario };
    Section section = Section::None;
    ScenarioSpec* current = nullptr;

    std::string raw;
    while (std::getline(in, raw)) {
        ++ctx.line;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']') ctx.fail("unterminated section header");
            const auto inner = detail::trim(line.substr(1, line.size() - 2));
            if (inner == "engine") {
                section = Section::Engine;
                current = nullptr;
                continue;
            }
            constexpr std::string_view kScenario = "scenario";
            if (inner.substr(0, kScenario.size()) == kScenario) {
                const auto name = detail::trim(inner.substr(kScenario.size()));
                if (!detail::valid_name(name)) {
                    ctx.fail("scenario name must be a nonempty [A-Za-z0-9._-] token");
                }
                spec.scenarios.emplace_back();
                current = &spec.scenarios.back();
                current->config.name = std::string(name);
                section = Section::Scenario;
                continue;
            }
            ctx.fail("unknown section '" + std::string(inner) + "'");
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) ctx.fail("expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key.empty()) ctx.fail("empty key");

        if (section == Section::Engine) {
            if (key == "epsilon") {
                spec.engine.epsilon = detail::parse_real(value, ctx);
            } else if (key == "sample_count") {
                spec.engine.sample_count = static_cast<std::size_t>(detail::parse_u64(value, ctx));
            } else if (key == "alpha") {
                spec.engine.alpha = detail::parse_real(value, ctx);
            } else if (key == "min_days") {
                spec.engine.min_days = static_cast<int>(detail::parse_u64(value, ctx));
            } else if (key == "seed") {
                spec.engine.seed = detail::parse_u64(value, ctx);
            } else if (key == "n_runs") {
                spec.n_runs = static_cast<std::size_t>(detail::parse_u64(value, ctx));
            } else if (key == "conv_prior") {
                const auto v = detail::parse_reals(value, 2, ctx);
                spec.engine.conv_prior = {v[0], v[1]};
            } else if (key == "value_prior") {
                const auto v = detail::parse_reals(value, 4, ctx);
                spec.engine.value_prior = {v[0], v[1], v[2], v[3]};
            } else {
                ctx.fail("unknown engine key '" + std::string(key) + "'");
            }
            continue;
        }

        if (section == Section::Scenario) {
            auto& sc = current->config;
            if (key == "daily_visitors") {
                sc.daily_visitors = detail::parse_u64(value, ctx);
            } else if (key == "max_days") {
                sc.max_days = static_cast<int>(detail::parse_u64(value, ctx));
            } else if (key == "control") {
                sc.control = static_cast<std::size_t>(detail::parse_u64(value, ctx));
            } else if (key == "correct_winner") {
                if (value == "none") {
                    sc.correct_winner = std::nullopt;
                } else {
                    sc.correct_winner = static_cast<std::size_t>(detail::parse_u64(value, ctx));
                }
            } else if (key == "variant") {
                const auto v = detail::parse_reals(value, 3, ctx);
                sc.variants.push_back({v[0], v[1], v[2]});
            } else if (key.substr(0, 11) == "conv_prior_") {
                const auto idx = detail::parse_u64(key.substr(11), ctx);
                const auto v = detail::parse_reals(value, 2, ctx);
                current->conv_prior_overrides[static_cast<std::size_t>(idx)] = {v[0], v[1]};
            } else if (key.substr(0, 12) == "value_prior_") {
                const auto idx = detail::parse_u64(key.substr(12), ctx);
                const auto v = detail::parse_reals(value, 4, ctx);
                current->value_prior_overrides[static_cast<std::size_t>(idx)] = {v[0], v[1], v[2],
                                                                                 v[3]};
            } else {
                ctx.fail("unknown scenario key '" + std::string(key) + "'");
            }
            continue;
        }

        ctx.fail("key outside any section");
    }

    try {
        validate_study(spec);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, 0, e.what());
    }
    return spec;
}

inline StudySpec load_study_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    return parse_study_spec(in, path);
}

// Echo form: parses back to the identical study (reals are written with
// shortest round-trip precision).
inline void write_study_spec(std::ostream& out, const StudySpec& spec) {
    using detail::format_real;
    out << "[engine]\n";
    out << "epsilon = " << format_real(spec.engine.epsilon) << "\n";
    out << "sample_count = " << spec.engine.sample_count << "\n";
    out << "alpha = " << format_real(spec.engine.alpha) << "\n";
    out << "min_days = " << spec.engine.min_days << "\n";
    out << "seed = " << spec.engine.seed << "\n";
    out << "n_runs = " << spec.n_runs << "\n";
    out << "conv_prior = " << format_real(spec.engine.conv_prior.alpha) << " "
        << format_real(spec.engine.conv_prior.beta) << "\n";
    out << "value_prior = " << format_real(spec.engine.value_prior.mu) << " "
        << format_real(spec.engine.value_prior.n_pseudo) << " "
        << format_real(spec.engine.value_prior.alpha) << " "
        << format_real(spec.engine.value_prior.beta) << "\n";
    for (const auto& sc : spec.scenarios) {
        out << "\n[scenario " << sc.config.name << "]\n";
        out << "daily_visitors = " << sc.config.daily_visitors << "\n";
        out << "max_days = " << sc.config.max_days << "\n";
        out << "control = " << sc.config.control << "\n";
        out << "correct_winner = "
            << (sc.config.correct_winner ? std::to_string(*sc.config.correct_winner)
                                         : std::string("none"))
            << "\n";
        for (const auto& v : sc.config.variants) {
            out << "variant = " << format_real(v.conv_rate) << " " << format_real(v.aov) << " "
                << format_real(v.aov_std) << "\n";
        }
        for (const auto& [i, p] : sc.conv_prior_overrides) {
            out << "conv_prior_" << i << " = " << format_real(p.alpha) << " "
                << format_real(p.beta) << "\n";
        }
        for (const auto& [i, p] : sc.value_prior_overrides) {
            out << "value_prior_" << i << " = " << format_real(p.mu) << " "
                << format_real(p.n_pseudo) << " " << format_real(p.alpha) << " "
                << format_real(p.beta) << "\n";
        }
    }
}

// Saved experiment state: cumulative per-variant aggregates for the evaluate
// and ppc commands.
struct StateFile {
    double epsilon = 0.01;
    std::size_t sample_count = 20000;
    std::size_t control = 0;
    std::vector<VariantState> states;
};

inline StateFile parse_state_file(std::istream& in, const std::string& path) {
    StateFile sf;
    detail::ParseContext ctx{path, 0};

    std::map<std::size_t, VariantState> blocks;
    enum class Section { None, Engine, Variant };
    Section section = Section::None;
    VariantState* current = nullptr;

    std::string raw;
    while (std::getline(in, raw)) {
        ++ctx.line;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']') ctx.fail("unterminated section header");
            const auto inner = detail::trim(line.substr(1, line.size() - 2));
            if (inner == "engine") {
                section = Section::Engine;
                current = nullptr;
                continue;
            }
            constexpr std::string_view kVariant = "variant";
            if (inner.substr(0, kVariant.size()) == kVariant) {
                const auto idx_tok = detail::trim(inner.substr(kVariant.size()));
                const auto idx =
                    static_cast<std::size_t>(detail::parse_u64(idx_tok, ctx));
                if (blocks.count(idx)) ctx.fail("duplicate [variant " + std::to_string(idx) + "]");
                current = &blocks[idx];
                current->id = idx;
                section = Section::Variant;
                continue;
            }
            ctx.fail("unknown section '" + std::string(inner) + "'");
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) ctx.fail("expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));

        if (section == Section::Engine) {
            if (key == "epsilon") {
                sf.epsilon = detail::parse_real(value, ctx);
            } else if (key == "sample_count") {
                sf.sample_count = static_cast<std::size_t>(detail::parse_u64(value, ctx));
            } else if (key == "control") {
                sf.control = static_cast<std::size_t>(detail::parse_u64(value, ctx));
            } else {
                ctx.fail("unknown engine key '" + std::string(key) + "'");
            }
            continue;
        }

        if (section == Section::Variant) {
            if (key == "visitors") {
                current->visitors = detail::parse_u64(value, ctx);
            } else if (key == "conversions") {
                current->conversions = detail::parse_u64(value, ctx);
            } else if (key == "value_count") {
                current->values.count = detail::parse_u64(value, ctx);
            } else if (key == "value_sum") {
                current->values.sum = detail::parse_real(value, ctx);
            } else if (key == "value_sum_sq") {
                current->values.sum_sq = detail::parse_real(value, ctx);
            } else if (key == "conv_prior") {
                const auto v = detail::parse_reals(value, 2, ctx);
                current->conv_prior = {v[0], v[1]};
            } else if (key == "value_prior") {
                const auto v = detail::parse_reals(value, 4, ctx);
                current->value_prior = {v[0], v[1], v[2], v[3]};
            } else {
                ctx.fail("unknown variant key '" + std::string(key) + "'");
            }
            continue;
        }

        ctx.fail("key outside any section");
    }

    if (blocks.empty()) throw ConfigError(path, 0, "no [variant <i>] sections");
    for (const auto& [idx, st] : blocks) {
        if (idx != sf.states.size()) {
            throw ConfigError(path, 0,
                              "variant indices must be contiguous from 0; missing variant " +
                                  std::to_string(sf.states.size()));
        }
        sf.states.push_back(st);
    }
    if (sf.control >= sf.states.size()) {
        throw ConfigError(path, 0, "control index out of range");
    }
    return sf;
}

inline StateFile load_state_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open state file");
    return parse_state_file(in, path);
}

// Transaction values, whitespace-separated, any number per line. Lines
// starting with # or ; are comments.
inline std::vector<double> parse_transactions(std::istream& in, const std::string& path) {
    std::vector<double> out;
    detail::ParseContext ctx{path, 0};
    std::string raw;
    while (std::getline(in, raw)) {
        ++ctx.line;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        for (const auto& tok : detail::split_tokens(line)) {
            out.push_back(detail::parse_real(tok, ctx));
        }
    }
    return out;
}

inline std::vector<double> load_transactions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open transactions file");
    return parse_transactions(in, path);
}

}  // namespace rpvbayes
