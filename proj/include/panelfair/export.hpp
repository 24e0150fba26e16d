#pragma once

#include <string>
#include <vector>

#include "panelfair/config.hpp"
#include "panelfair/harness.hpp"
#include "panelfair/losses.hpp"

namespace panelfair {

struct ExportOptions {
    /// runtime_s is written as null unless this is set, so repeated runs
    /// produce identical bytes.
    bool include_timing = false;
};

/// {error_regret, unfairness_total, unfairness_regret, lagrangian_regret,
///  lp_benchmark, lp_benchmark_lagrangian, comparator_unfairness, T, seed,
///  learner parameters, version, runtime_s}.
Json summary_json(const RunRecord& record, const ExportOptions& options = {});

/// Config snapshot: the source document if there is one, plus the resolved learner.
Json config_json(const RunRecord& record);

/// Writes ledger.csv, config.json and summary.json into `dir` (created if
/// needed). Throws IoError naming the path on failure.
void export_run(const RunRecord& record, const std::string& dir, const ExportOptions& options = {});

/// What a chart needs from a run; loadable from an exported directory.
struct PlotSeries {
    std::string label;
    std::vector<LedgerRow> rows;
    double lp_benchmark = 0.0;
};

PlotSeries plot_series(const RunRecord& record);
/// Reads ledger.csv and summary.json from an export directory.
PlotSeries load_plot_series(const std::string& dir);

/// regret(t) = sum_{s <= t} error_s - (t / T) * lp_benchmark, for t = 1..T.
std::vector<double> cumulative_error_regret(const PlotSeries& series);

/// Writes error_regret.svg, unfairness.svg and regret_rate.svg into `dir` and
/// returns their paths. Throws ConfigError for an empty list.
std::vector<std::string> emit_plots(const std::vector<PlotSeries>& series, const std::string& dir);

}  // namespace panelfair
