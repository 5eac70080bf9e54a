#pragma once

// Report emission for study results: per-run records as comma-separated
// rows, aggregate summaries as comma-separated and aligned-text tables.
// All formatting is fixed-width printf style so identical results always
// serialize to identical bytes.

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "rpvbayes/simulate.hpp"

namespace rpvbayes {

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return std::string(buf);
}

inline std::string format_pct(double v) { return format_fixed(v, 1); }
inline std::string format_currency(double v) { return format_fixed(v, 4); }

inline std::string variant_label(std::size_t i) {
    if (i < 26) return std::string(1, static_cast<char>('A' + i));
    return std::to_string(i);
}

inline void write_run_records_csv(std::ostream& out, const std::vector<RunRecord>& records) {
    out << "run_id,method,outcome,winner,duration_days,data_seed,final_losses\n";
    for (const auto& rec : records) {
        out << rec.run_id << ',' << to_string(rec.method) << ',' << to_string(rec.outcome) << ',';
        if (rec.outcome == OutcomeKind::Winner) out << rec.winner;
        out << ',' << rec.duration_days << ',' << rec.data_seed << ',';
        for (std::size_t i = 0; i < rec.final_losses.size(); ++i) {
            if (i) out << ';';
            out << format_currency(rec.final_losses[i]);
        }
        out << '\n';
    }
}

namespace detail {

inline std::string duration_cell(const MethodAggregate& agg) {
    return agg.decided_count == 0 ? std::string("n/a") : format_fixed(agg.avg_duration_days(), 1);
}

}  // namespace detail

inline void write_aggregate_csv(std::ostream& out, const AggregateReport& report) {
    const std::size_t n = report.bayesian.winner_counts.size();
    out << "scenario,method,n_runs";
    for (std::size_t i = 0; i < n; ++i) out << ",winner_" << variant_label(i) << "_pct";
    out << ",futility_pct,timed_out_pct,correct_pct,avg_duration_days\n";
    for (const auto* agg : {&report.bayesian, &report.peeking}) {
        out << report.scenario << ','
            << to_string(agg == &report.bayesian ? Method::Bayesian : Method::Peeking) << ','
            << report.n_runs;
        for (std::size_t i = 0; i < n; ++i) out << ',' << format_pct(agg->winner_pct(i));
        out << ',' << format_pct(agg->futility_pct()) << ',' << format_pct(agg->timed_out_pct())
            << ',' << format_pct(agg->correct_pct()) << ',' << detail::duration_cell(*agg) << '\n';
    }
}

inline void write_aggregate_text(std::ostream& out, const AggregateReport& report,
                                 const ScenarioConfig& sc) {
    const std::size_t n = report.bayesian.winner_counts.size();

    std::vector<std::string> headers;
    headers.push_back("method");
    for (std::size_t i = 0; i < n; ++i) {
        std::string h = "win " + variant_label(i);
        if (i == sc.control) h += "*";
        headers.push_back(h);
    }
    headers.push_back("futility");
    headers.push_back("timed out");
    headers.push_back("correct");
    headers.push_back("avg days");

    std::vector<std::vector<std::string>> rows;
    for (const auto* agg : {&report.bayesian, &report.peeking}) {
        std::vector<std::string> row;
        row.push_back(to_string(agg == &report.bayesian ? Method::Bayesian : Method::Peeking));
        for (std::size_t i = 0; i < n; ++i) row.push_back(format_pct(agg->winner_pct(i)) + "%");
        row.push_back(format_pct(agg->futility_pct()) + "%");
        row.push_back(format_pct(agg->timed_out_pct()) + "%");
        row.push_back(format_pct(agg->correct_pct()) + "%");
        row.push_back(detail::duration_cell(*agg));
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> widths(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
    }

    out << "scenario " << report.scenario << "  (runs: " << report.n_runs
        << ", visitors/day: " << sc.daily_visitors << ", max days: " << sc.max_days
        << ", * = control)\n";
    auto emit_row = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out << "  ";
            // method column left-aligned, numeric columns right-aligned
            if (c == 0) {
                out << cells[c] << std::string(widths[c] - cells[c].size(), ' ');
            } else {
                out << std::string(widths[c] - cells[c].size(), ' ') << cells[c];
            }
        }
        out << '\n';
    };
    emit_row(headers);
    for (const auto& row : rows) emit_row(row);
}

}  // namespace rpvbayes
