#pragma once

#include <string>
#include <vector>

#include "soscal/estimator.hpp"

// CLI-facing serialization: the sweep score table as CSV, sweep and report
// summaries as JSON and a fixed-width terminal table. Numbers use shortest
// round-trip formatting so identical runs serialize byte-identically; the
// mean_eval_seconds timing fields are the only values expected to differ
// between repeated runs.

namespace soscal {

// One row per (metric, patch, candidate):
// metric,layer_depth_mm,layer_index,jitter_index,s_candidate,score
std::string sweep_csv(const std::vector<SweepResult>& results);

// Selected SoS, tie diagnostics and evaluation timing per result. Infinite
// scores are serialized as the strings "inf" / "-inf".
std::string sweep_summary_json(const std::vector<SweepResult>& results,
                               TxSelection inputs);

// Parses a summary back into skeleton sweep results: the candidate list is
// collapsed to the swept range and the score curve to the winning score,
// which is everything aggregation needs.
std::vector<SweepResult> read_sweep_summary(const std::string& path);

std::string report_json(const EstimateReport& report, double true_sos,
                        const std::vector<double>& metric_eval_seconds);
std::string report_table(const EstimateReport& report,
                         const std::vector<double>& metric_eval_seconds);

// Mean evaluation time aligned with report.summaries, averaged over each
// metric's sweep results.
std::vector<double> mean_eval_seconds_per_metric(
    const EstimateReport& report, const std::vector<SweepResult>& results);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace soscal
