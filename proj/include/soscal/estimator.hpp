#pragma once

#include <string>
#include <vector>

#include "soscal/beamform.hpp"
#include "soscal/metrics.hpp"
#include "soscal/types.hpp"

// Sweep orchestration: beamform every candidate speed of sound, score the
// images with the requested metrics (optionally per depth layer) and select
// the candidate that maximizes each score curve.

namespace soscal {

// Which transmit events of an acquisition feed the metrics: the centered
// event, the innermost pair straddling the center, or every event.
enum class TxSelection { Single, Dual, Full };

std::string tx_selection_name(TxSelection sel);
TxSelection tx_selection_from_name(const std::string& name);

// Resolves a selection against the recorded transmit events. Single picks
// the event whose virtual source sits closest to the array center, Dual the
// innermost pair with sources on opposite sides of it, Full every event.
std::vector<int> select_tx_indices(const std::vector<TxEvent>& events,
                                   TxSelection sel);

// Equi-depth layer protocol: each depth tiles the axial field into layers
// and every layer is re-evaluated at jitter_count downward shifts of
// jitter_step_mm. Shifts stop at the bottom of the field so every position
// keeps the full layer depth; the bottom-most positions of the deepest layer
// may therefore coincide. An empty depth list means a single full-field
// layer with no jitter.
struct PatchSpec {
    std::vector<double> layer_depths_mm;
    double jitter_step_mm = 0.4;
    int jitter_count = 1;
};

void validate_patch_spec(const PatchSpec& patch, const ImageGrid& grid);

// Identifies one scored patch; the full-field sweep reports the whole axial
// extent as a single layer at jitter zero.
struct PatchKey {
    double layer_depth_mm = 0.0;
    int layer_index = 0;
    int jitter_index = 0;
};

// Lowest-index argmax with exact-tie diagnostics. A sweep where every
// candidate scores the same is degenerate: the argmax is meaningless and
// callers are expected to surface the flag.
struct Selection {
    int index = 0;
    int tie_count = 1;
    bool degenerate = false;
};

Selection select_best(const std::vector<double>& scores);

// One metric's score curve over the candidate speeds for one patch.
// Scores are oriented so that larger is better; mean_eval_seconds covers the
// metric computation alone, not the beamforming.
struct SweepResult {
    MetricId metric = MetricId::Focus;
    PatchKey patch;
    std::vector<double> candidates;
    std::vector<double> scores;
    double best_sos = 0.0;
    int best_index = 0;
    int tie_count = 1;
    bool degenerate = false;
    double mean_eval_seconds = 0.0;
};

struct SweepRequest {
    std::vector<MetricId> metrics;
    SosSearchSpec spec;
    TxSelection inputs = TxSelection::Dual;
    PatchSpec patch;
    MetricParams params;
    BeamformConfig beamform;
};

// Runs the sweep once: each candidate is beamformed a single time and every
// metric and patch is scored from those images. Single-image metrics see the
// B-mode of the compounded frame, pair metrics the two beamformed RF frames,
// multi-frame metrics all of them. Results are ordered by metric, then by
// patch (depth, layer, jitter). Pixel rows are sliced per patch after the
// full-grid beamforming and log compression.
std::vector<SweepResult> run_sweep(const RFChannelData& rf,
                                   const SweepRequest& req);

// Full-field sweep for one metric.
SweepResult estimate_global(const RFChannelData& rf, MetricId metric,
                            const SosSearchSpec& spec, TxSelection inputs,
                            const MetricParams& params = {},
                            const BeamformConfig& config = {});

// Layered sweep for one metric, one SweepResult per (depth, layer, jitter).
std::vector<SweepResult> estimate_layered(const RFChannelData& rf,
                                          MetricId metric,
                                          const SosSearchSpec& spec,
                                          const PatchSpec& patch,
                                          TxSelection inputs,
                                          const MetricParams& params = {},
                                          const BeamformConfig& config = {});

// Narrows a search to [center - half_width, center + half_width] keeping the
// original step.
SosSearchSpec restrict_range(const SosSearchSpec& spec, double center,
                             double half_width);

// Affine rescaling of a score curve onto [0, 1]. Infinite scores pin to the
// interval ends and the finite remainder is compressed into the middle half,
// so the argmax never moves. A constant curve cannot be rescaled.
std::vector<double> normalize_scores(const std::vector<double>& scores);

// One sweep's contribution to a report.
struct MetricEstimate {
    MetricId metric = MetricId::Focus;
    PatchKey patch;
    double estimate = 0.0;
    double score = 0.0;
    double abs_error = 0.0;
    int tie_count = 1;
    bool degenerate = false;
};

// Error statistics of one metric across repeated sweeps.
struct MetricSummary {
    MetricId metric = MetricId::Focus;
    int count = 0;
    double mae = 0.0;
    double std_dev = 0.0;
    bool range_bound_suspect = false;
};

struct EstimateReport {
    std::vector<MetricEstimate> estimates;
    std::vector<MetricSummary> summaries;
};

// Absolute errors against a known ground truth, summarized per metric as
// mean absolute error with population standard deviation. A mean error above
// a quarter of the tested candidate range is flagged as range-bound.
EstimateReport aggregate_errors(const std::vector<SweepResult>& results,
                                double true_sos);

}  // namespace soscal
