#include "soscal/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace soscal {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json score_value(double v) {
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    return v;
}

double parse_score(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw IoError("sweep summary '" + path + "': malformed score");
}

const json& field(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end())
        throw IoError("sweep summary '" + path + "': missing field '" + key + "'");
    return *it;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepResult>& results) {
    std::string out =
        "metric,layer_depth_mm,layer_index,jitter_index,s_candidate,score\n";
    for (const SweepResult& r : results) {
        const std::string prefix = metric_name(r.metric) + "," +
                                   fmt(r.patch.layer_depth_mm) + "," +
                                   std::to_string(r.patch.layer_index) + "," +
                                   std::to_string(r.patch.jitter_index) + ",";
        for (size_t i = 0; i < r.candidates.size(); ++i) {
            out += prefix;
            out += fmt(r.candidates[i]);
            out += ',';
            out += fmt(r.scores[i]);
            out += '\n';
        }
    }
    return out;
}

std::string sweep_summary_json(const std::vector<SweepResult>& results,
                               TxSelection inputs) {
    if (results.empty())
        throw ConfigError("sweep summary: no results to serialize");
    json root;
    root["magic"] = "SOSCAL_SWEEP";
    root["version"] = 1;
    root["inputs"] = tx_selection_name(inputs);
    root["sos_min"] = results.front().candidates.front();
    root["sos_max"] = results.front().candidates.back();
    root["sos_step"] = results.front().candidates.size() > 1
                           ? results.front().candidates[1] -
                                 results.front().candidates[0]
                           : 0.0;
    json rows = json::array();
    for (const SweepResult& r : results) {
        json row;
        row["metric"] = metric_name(r.metric);
        row["layer_depth_mm"] = r.patch.layer_depth_mm;
        row["layer_index"] = r.patch.layer_index;
        row["jitter_index"] = r.patch.jitter_index;
        row["best_sos"] = r.best_sos;
        row["best_score"] = score_value(r.scores[r.best_index]);
        row["tie_count"] = r.tie_count;
        row["degenerate"] = r.degenerate;
        row["mean_eval_seconds"] = r.mean_eval_seconds;
        rows.push_back(std::move(row));
    }
    root["results"] = std::move(rows);
    return root.dump(2) + "\n";
}

std::vector<SweepResult> read_sweep_summary(const std::string& path) {
    json root;
    try {
        root = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw IoError("sweep summary '" + path + "': invalid JSON: " + e.what());
    }
    if (!root.is_object() || field(root, "magic", path) != "SOSCAL_SWEEP")
        throw IoError("sweep summary '" + path + "': not a sweep summary file");
    if (field(root, "version", path) != 1)
        throw IoError("sweep summary '" + path + "': unsupported version");

    const double sos_min = field(root, "sos_min", path).get<double>();
    const double sos_max = field(root, "sos_max", path).get<double>();
    const json& rows = field(root, "results", path);
    if (!rows.is_array() || rows.empty())
        throw IoError("sweep summary '" + path + "': no results");

    std::vector<SweepResult> results;
    results.reserve(rows.size());
    for (const json& row : rows) {
        SweepResult r;
        r.metric = metric_from_name(field(row, "metric", path).get<std::string>());
        r.patch.layer_depth_mm = field(row, "layer_depth_mm", path).get<double>();
        r.patch.layer_index = field(row, "layer_index", path).get<int>();
        r.patch.jitter_index = field(row, "jitter_index", path).get<int>();
        r.candidates = {sos_min, sos_max};
        r.scores = {parse_score(field(row, "best_score", path), path)};
        r.best_index = 0;
        r.best_sos = field(row, "best_sos", path).get<double>();
        r.tie_count = field(row, "tie_count", path).get<int>();
        r.degenerate = field(row, "degenerate", path).get<bool>();
        r.mean_eval_seconds = field(row, "mean_eval_seconds", path).get<double>();
        results.push_back(std::move(r));
    }
    return results;
}

std::string report_json(const EstimateReport& report, double true_sos,
                        const std::vector<double>& metric_eval_seconds) {
    json root;
    root["magic"] = "SOSCAL_REPORT";
    root["version"] = 1;
    root["true_sos"] = true_sos;

    json estimates = json::array();
    for (const MetricEstimate& e : report.estimates) {
        json row;
        row["metric"] = metric_name(e.metric);
        row["layer_depth_mm"] = e.patch.layer_depth_mm;
        row["layer_index"] = e.patch.layer_index;
        row["jitter_index"] = e.patch.jitter_index;
        row["estimate"] = e.estimate;
        row["score"] = score_value(e.score);
        row["abs_error"] = e.abs_error;
        row["tie_count"] = e.tie_count;
        row["degenerate"] = e.degenerate;
        estimates.push_back(std::move(row));
    }
    root["estimates"] = std::move(estimates);

    json summaries = json::array();
    for (size_t i = 0; i < report.summaries.size(); ++i) {
        const MetricSummary& s = report.summaries[i];
        json row;
        row["metric"] = metric_name(s.metric);
        row["count"] = s.count;
        row["mae"] = s.mae;
        row["std_dev"] = s.std_dev;
        row["range_bound_suspect"] = s.range_bound_suspect;
        row["mean_eval_seconds"] =
            i < metric_eval_seconds.size() ? metric_eval_seconds[i] : 0.0;
        summaries.push_back(std::move(row));
    }
    root["summaries"] = std::move(summaries);
    return root.dump(2) + "\n";
}

std::string report_table(const EstimateReport& report,
                         const std::vector<double>& metric_eval_seconds) {
    std::string out =
        "metric        n   MAE [m/s]   std [m/s]   time [ms]  flags\n";
    for (size_t i = 0; i < report.summaries.size(); ++i) {
        const MetricSummary& s = report.summaries[i];
        bool any_degenerate = false;
        for (const MetricEstimate& e : report.estimates)
            if (e.metric == s.metric && e.degenerate) any_degenerate = true;
        std::string flags;
        if (s.range_bound_suspect) flags += " range-bound";
        if (any_degenerate) flags += " degenerate";

        char line[128];
        std::snprintf(line, sizeof(line), "%-10s %4d %11.2f %11.2f %11.3f %s\n",
                      metric_name(s.metric).c_str(), s.count, s.mae, s.std_dev,
                      (i < metric_eval_seconds.size() ? metric_eval_seconds[i]
                                                      : 0.0) *
                          1e3,
                      flags.empty() ? "" : flags.c_str() + 1);
        out += line;
    }
    return out;
}

std::vector<double> mean_eval_seconds_per_metric(
    const EstimateReport& report, const std::vector<SweepResult>& results) {
    std::vector<double> out;
    out.reserve(report.summaries.size());
    for (const MetricSummary& s : report.summaries) {
        double sum = 0.0;
        int n = 0;
        for (const SweepResult& r : results)
            if (r.metric == s.metric) {
                sum += r.mean_eval_seconds;
                ++n;
            }
        out.push_back(n > 0 ? sum / n : 0.0);
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

}  // namespace soscal
