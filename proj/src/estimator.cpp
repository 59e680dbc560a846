#include "soscal/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "soscal/imaging.hpp"

namespace soscal {

namespace {

// Fewest pixel rows a metric can digest, so undersized layers fail before
// any beamforming starts.
int metric_min_rows(MetricId id) {
    switch (id) {
        case MetricId::SSIM:
            return 7;
        case MetricId::GradMag:
        case MetricId::Tenengrad:
        case MetricId::STTen:
            return 3;
        default:
            return 1;
    }
}

struct PatchRows {
    PatchKey key;
    int row_begin = 0;
    int row_end = 0;
};

// Expands a patch spec into concrete row ranges on the beamforming grid.
// Layers tile the axial field top down; jittered copies slide downward but
// stop at the bottom of the field, so every position keeps the full layer
// depth (the bottom-most positions of a layer may coincide).
std::vector<PatchRows> patch_rows(const ImageGrid& grid, const PatchSpec& patch) {
    const double field_mm = (grid.z_max - grid.z_min) * 1e3;
    const double dz_mm = field_mm / grid.n_z;

    std::vector<double> depths = patch.layer_depths_mm;
    int jitters = patch.jitter_count;
    if (depths.empty()) {
        depths.push_back(field_mm);
        jitters = 1;
    }

    std::vector<PatchRows> out;
    for (double depth : depths) {
        const int n_layers = static_cast<int>(std::round(field_mm / depth));
        for (int layer = 0; layer < n_layers; ++layer)
            for (int j = 0; j < jitters; ++j) {
                const double top_mm =
                    std::min(layer * depth + j * patch.jitter_step_mm,
                             field_mm - depth);
                PatchRows p;
                p.key = PatchKey{depth, layer, j};
                p.row_begin = static_cast<int>(std::lround(top_mm / dz_mm));
                p.row_end = std::min(
                    grid.n_z, static_cast<int>(std::lround((top_mm + depth) / dz_mm)));
                out.push_back(p);
            }
    }
    return out;
}

}  // namespace

std::string tx_selection_name(TxSelection sel) {
    switch (sel) {
        case TxSelection::Single: return "single";
        case TxSelection::Dual: return "dual";
        case TxSelection::Full: return "full";
    }
    throw ConfigError("unknown transmit selection");
}

TxSelection tx_selection_from_name(const std::string& name) {
    if (name == "single") return TxSelection::Single;
    if (name == "dual") return TxSelection::Dual;
    if (name == "full") return TxSelection::Full;
    throw ConfigError("unknown transmit selection '" + name + "'");
}

std::vector<int> select_tx_indices(const std::vector<TxEvent>& events,
                                   TxSelection sel) {
    if (events.empty()) throw ConfigError("transmit selection: no events recorded");
    switch (sel) {
        case TxSelection::Single: {
            int best = 0;
            for (int i = 1; i < static_cast<int>(events.size()); ++i)
                if (std::abs(events[i].vs_x) < std::abs(events[best].vs_x)) best = i;
            return {best};
        }
        case TxSelection::Dual: {
            int left = -1, right = -1;
            for (int i = 0; i < static_cast<int>(events.size()); ++i) {
                const double x = events[i].vs_x;
                if (x < 0.0 && (left < 0 || x > events[left].vs_x)) left = i;
                if (x > 0.0 && (right < 0 || x < events[right].vs_x)) right = i;
            }
            if (left < 0 || right < 0)
                throw ConfigError(
                    "dual selection needs virtual sources on both sides of the "
                    "array center");
            return {left, right};
        }
        case TxSelection::Full: {
            std::vector<int> all(events.size());
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
    }
    throw ConfigError("unknown transmit selection");
}

void validate_patch_spec(const PatchSpec& patch, const ImageGrid& grid) {
    if (patch.layer_depths_mm.empty()) return;
    if (!(patch.jitter_step_mm > 0.0))
        throw ConfigError("patch spec: jitter step must be positive");
    if (patch.jitter_count < 1)
        throw ConfigError("patch spec: jitter count must be at least 1");
    const double field_mm = (grid.z_max - grid.z_min) * 1e3;
    for (double depth : patch.layer_depths_mm) {
        if (!(depth > 0.0) || depth > field_mm * (1.0 + 1e-9))
            throw ConfigError("patch spec: layer depth outside the axial field");
        const double ratio = field_mm / depth;
        if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio)
            throw ConfigError(
                "patch spec: layer depth does not tile the axial field evenly");
    }
}

Selection select_best(const std::vector<double>& scores) {
    if (scores.empty()) throw ConfigError("select_best: empty score vector");
    Selection sel;
    const int n = static_cast<int>(scores.size());
    for (int i = 1; i < n; ++i)
        if (scores[i] > scores[sel.index]) sel.index = i;
    sel.tie_count = static_cast<int>(
        std::count(scores.begin(), scores.end(), scores[sel.index]));
    sel.degenerate = sel.tie_count == n;
    return sel;
}

std::vector<SweepResult> run_sweep(const RFChannelData& rf,
                                   const SweepRequest& req) {
    if (req.metrics.empty()) throw ConfigError("run_sweep: no metrics requested");
    validate_metric_params(req.params);
    validate_patch_spec(req.patch, req.beamform.grid);

    const std::vector<int> tx = select_tx_indices(rf.tx_events, req.inputs);
    const int n_frames = static_cast<int>(tx.size());
    bool wants_bmode = false;
    for (MetricId m : req.metrics) {
        switch (metric_arity(m)) {
            case MetricArity::SingleImage:
                wants_bmode = true;
                break;
            case MetricArity::Pair:
                if (n_frames != 2)
                    throw ArityError("metric " + metric_name(m) +
                                     " needs exactly two transmit frames; selection " +
                                     tx_selection_name(req.inputs) + " provides " +
                                     std::to_string(n_frames));
                break;
            case MetricArity::MultiFrame:
                if (n_frames < 2)
                    throw ArityError("metric " + metric_name(m) +
                                     " needs at least two transmit frames; selection " +
                                     tx_selection_name(req.inputs) + " provides " +
                                     std::to_string(n_frames));
                break;
        }
    }

    const std::vector<PatchRows> patches = patch_rows(req.beamform.grid, req.patch);
    for (MetricId m : req.metrics)
        for (const PatchRows& p : patches)
            if (p.row_end - p.row_begin < metric_min_rows(m))
                throw ConfigError("patch too small for metric " + metric_name(m));

    const std::vector<double> candidates = req.spec.candidates();
    const size_t n_c = candidates.size();

    std::vector<SweepResult> results;
    results.reserve(req.metrics.size() * patches.size());
    for (MetricId m : req.metrics)
        for (const PatchRows& p : patches) {
            SweepResult r;
            r.metric = m;
            r.patch = p.key;
            r.candidates = candidates;
            r.scores.assign(n_c, 0.0);
            results.push_back(std::move(r));
        }
    std::vector<double> eval_seconds(results.size(), 0.0);

    DasWorkspace workspace(rf, req.beamform);
    for (size_t ci = 0; ci < n_c; ++ci) {
        const double sos = candidates[ci];
        std::vector<RFImage> frames;
        frames.reserve(tx.size());
        for (int t : tx) frames.push_back(workspace.beamform(t, sos));

        std::optional<BModeImage> bmode;
        if (wants_bmode) bmode.emplace(log_compress(envelope(compound(frames))));

        size_t slot = 0;
        for (MetricId m : req.metrics)
            for (const PatchRows& p : patches) {
                const auto t_start = std::chrono::steady_clock::now();
                double score;
                try {
                    switch (metric_arity(m)) {
                        case MetricArity::SingleImage: {
                            const BModeImage in =
                                slice_rows(*bmode, p.row_begin, p.row_end);
                            score = evaluate_single(m, in, req.params);
                            break;
                        }
                        case MetricArity::Pair: {
                            const RFImage a =
                                slice_rows(frames[0], p.row_begin, p.row_end);
                            const RFImage b =
                                slice_rows(frames[1], p.row_begin, p.row_end);
                            score = evaluate_pair(m, a, b, req.params);
                            break;
                        }
                        case MetricArity::MultiFrame: {
                            std::vector<RFImage> slices;
                            slices.reserve(frames.size());
                            for (const RFImage& f : frames)
                                slices.push_back(
                                    slice_rows(f, p.row_begin, p.row_end));
                            score = evaluate_multi(m, slices, req.params);
                            break;
                        }
                        default:
                            throw ConfigError("run_sweep: unknown metric arity");
                    }
                } catch (const DegenerateError&) {
                    // a candidate whose images carry no usable signal loses
                    // to every scored one
                    score = -std::numeric_limits<double>::infinity();
                }
                eval_seconds[slot] += std::chrono::duration<double>(
                                          std::chrono::steady_clock::now() - t_start)
                                          .count();
                results[slot].scores[ci] = score;
                ++slot;
            }
    }

    for (size_t i = 0; i < results.size(); ++i) {
        const Selection sel = select_best(results[i].scores);
        results[i].best_index = sel.index;
        results[i].best_sos = results[i].candidates[sel.index];
        results[i].tie_count = sel.tie_count;
        results[i].degenerate = sel.degenerate;
        results[i].mean_eval_seconds = eval_seconds[i] / static_cast<double>(n_c);
    }
    return results;
}

SweepResult estimate_global(const RFChannelData& rf, MetricId metric,
                            const SosSearchSpec& spec, TxSelection inputs,
                            const MetricParams& params,
                            const BeamformConfig& config) {
    SweepRequest req{.metrics = {metric},
                     .spec = spec,
                     .inputs = inputs,
                     .patch = {},
                     .params = params,
                     .beamform = config};
    return run_sweep(rf, req).front();
}

std::vector<SweepResult> estimate_layered(const RFChannelData& rf,
                                          MetricId metric,
                                          const SosSearchSpec& spec,
                                          const PatchSpec& patch,
                                          TxSelection inputs,
                                          const MetricParams& params,
                                          const BeamformConfig& config) {
    SweepRequest req{.metrics = {metric},
                     .spec = spec,
                     .inputs = inputs,
                     .patch = patch,
                     .params = params,
                     .beamform = config};
    return run_sweep(rf, req);
}

SosSearchSpec restrict_range(const SosSearchSpec& spec, double center,
                             double half_width) {
    if (!(half_width > 0.0))
        throw ConfigError("restrict_range: half width must be positive");
    return SosSearchSpec(center - half_width, center + half_width, spec.step);
}

std::vector<double> normalize_scores(const std::vector<double>& scores) {
    if (scores.size() < 2)
        throw ConfigError("normalize_scores: needs at least two scores");
    if (std::count(scores.begin(), scores.end(), scores.front()) ==
        static_cast<long>(scores.size()))
        throw ConfigError("normalize_scores: degenerate curve");

    bool any_inf = false;
    double fmin = std::numeric_limits<double>::infinity();
    double fmax = -std::numeric_limits<double>::infinity();
    for (double s : scores) {
        if (std::isinf(s)) {
            any_inf = true;
            continue;
        }
        fmin = std::min(fmin, s);
        fmax = std::max(fmax, s);
    }

    std::vector<double> out(scores.size());
    if (!any_inf) {
        const double span = fmax - fmin;
        for (size_t i = 0; i < scores.size(); ++i)
            out[i] = (scores[i] - fmin) / span;
        return out;
    }
    const double span = fmax > fmin ? fmax - fmin : 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (std::isinf(scores[i]))
            out[i] = scores[i] > 0.0 ? 1.0 : 0.0;
        else
            out[i] = span > 0.0 ? 0.25 + (scores[i] - fmin) / (2.0 * span) : 0.5;
    }
    return out;
}

EstimateReport aggregate_errors(const std::vector<SweepResult>& results,
                                double true_sos) {
    if (results.empty()) throw ConfigError("aggregate_errors: no sweep results");

    EstimateReport report;
    report.estimates.reserve(results.size());
    for (const SweepResult& r : results) {
        MetricEstimate e;
        e.metric = r.metric;
        e.patch = r.patch;
        e.estimate = r.best_sos;
        e.score = r.scores[r.best_index];
        e.abs_error = std::abs(r.best_sos - true_sos);
        e.tie_count = r.tie_count;
        e.degenerate = r.degenerate;
        report.estimates.push_back(e);
    }

    std::vector<MetricId> order;
    for (const SweepResult& r : results)
        if (std::find(order.begin(), order.end(), r.metric) == order.end())
            order.push_back(r.metric);

    for (MetricId m : order) {
        double sum = 0.0;
        double span = 0.0;
        int n = 0;
        for (const SweepResult& r : results)
            if (r.metric == m) {
                sum += std::abs(r.best_sos - true_sos);
                if (n == 0) span = r.candidates.back() - r.candidates.front();
                ++n;
            }
        const double mae = sum / n;
        double var = 0.0;
        for (const SweepResult& r : results)
            if (r.metric == m) {
                const double d = std::abs(r.best_sos - true_sos) - mae;
                var += d * d;
            }
        MetricSummary s;
        s.metric = m;
        s.count = n;
        s.mae = mae;
        s.std_dev = std::sqrt(var / n);
        s.range_bound_suspect = mae > 0.25 * span;
        report.summaries.push_back(s);
    }
    return report;
}

}  // namespace soscal
