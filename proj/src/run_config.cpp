#include "soscal/run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

namespace soscal {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) {
    throw ConfigError("run config: " + msg);
}

void reject_unknown(const json& obj, const std::string& section,
                    std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) bad("unknown key '" + item.key() + "' in " + section);
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_num(const json& obj, const char* key, double fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) bad(std::string("'") + key + "' must be a number");
    return v->get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) bad(std::string("'") + key + "' must be an integer");
    return v->get<int>();
}

uint64_t get_u64(const json& obj, const char* key, uint64_t fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !v->is_number_integer())
        bad(std::string("'") + key + "' must be an integer");
    if (v->is_number_integer() && v->get<int64_t>() < 0)
        bad(std::string("'") + key + "' must not be negative");
    return v->get<uint64_t>();
}

std::string get_str(const json& obj, const char* key, const std::string& fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) bad(std::string("'") + key + "' must be a string");
    return v->get<std::string>();
}

json get_obj(const json& obj, const char* key) {
    const json* v = find(obj, key);
    if (!v) return json::object();
    if (!v->is_object()) bad(std::string("'") + key + "' must be an object");
    return *v;
}

}  // namespace

ProbeGeometry default_probe() { return ProbeGeometry(128, 0.3e-3, 5e6); }

std::vector<TxEvent> make_tx_events(const ProbeGeometry& probe,
                                    const TxSequenceConfig& tx) {
    return make_virtual_source_events(probe, tx.count, tx.vs_spacing, tx.vs_z,
                                      tx.aperture_size);
}

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        bad(std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) bad("top level must be an object");
    reject_unknown(root, "the top level",
                   {"simulate", "probe", "tx", "input_rf", "metrics", "search",
                    "beamform", "patch", "output", "seed"});

    RunConfig cfg;
    cfg.seed = get_u64(root, "seed", cfg.seed);

    const json sim = get_obj(root, "simulate");
    reject_unknown(sim, "'simulate'",
                   {"true_sos", "domain_width_mm", "domain_depth_mm",
                    "scatterer_density", "pulse_cycles", "sampling_frequency_mhz",
                    "noise_std", "amplitude_scale", "max_samples"});
    cfg.sim.true_sos = get_num(sim, "true_sos", cfg.sim.true_sos);
    cfg.sim.domain_width = get_num(sim, "domain_width_mm", cfg.sim.domain_width * 1e3) * 1e-3;
    cfg.sim.domain_depth = get_num(sim, "domain_depth_mm", cfg.sim.domain_depth * 1e3) * 1e-3;
    cfg.sim.scatterer_density = get_num(sim, "scatterer_density", cfg.sim.scatterer_density);
    cfg.sim.pulse_cycles = get_num(sim, "pulse_cycles", cfg.sim.pulse_cycles);
    cfg.sim.sampling_frequency =
        get_num(sim, "sampling_frequency_mhz", cfg.sim.sampling_frequency * 1e-6) * 1e6;
    cfg.sim.noise_std = get_num(sim, "noise_std", cfg.sim.noise_std);
    cfg.sim.amplitude_scale = get_num(sim, "amplitude_scale", cfg.sim.amplitude_scale);
    cfg.sim.max_samples = get_int(sim, "max_samples", cfg.sim.max_samples);
    validate_sim_config(cfg.sim);

    const json probe = get_obj(root, "probe");
    reject_unknown(probe, "'probe'", {"elements", "pitch_mm", "center_frequency_mhz"});
    cfg.probe = ProbeGeometry(
        get_int(probe, "elements", cfg.probe.element_count),
        get_num(probe, "pitch_mm", cfg.probe.pitch * 1e3) * 1e-3,
        get_num(probe, "center_frequency_mhz", cfg.probe.center_frequency * 1e-6) * 1e6);

    const json tx = get_obj(root, "tx");
    reject_unknown(tx, "'tx'",
                   {"inputs", "count", "vs_spacing_mm", "vs_z_mm", "aperture"});
    cfg.inputs = tx_selection_from_name(
        get_str(tx, "inputs", tx_selection_name(cfg.inputs)));
    cfg.tx.count = get_int(tx, "count", cfg.tx.count);
    cfg.tx.vs_spacing = get_num(tx, "vs_spacing_mm", cfg.tx.vs_spacing * 1e3) * 1e-3;
    cfg.tx.vs_z = get_num(tx, "vs_z_mm", cfg.tx.vs_z * 1e3) * 1e-3;
    cfg.tx.aperture_size = get_int(tx, "aperture", cfg.tx.aperture_size);
    make_tx_events(cfg.probe, cfg.tx);  // events must construct cleanly

    if (const json* v = find(root, "input_rf")) {
        if (!v->is_string()) bad("'input_rf' must be a string");
        cfg.input_rf = v->get<std::string>();
    }

    if (const json* v = find(root, "metrics")) {
        if (!v->is_array()) bad("'metrics' must be an array of metric names");
        for (const json& m : *v) {
            if (!m.is_string()) bad("'metrics' must be an array of metric names");
            cfg.metrics.push_back(metric_from_name(m.get<std::string>()));
        }
    }

    if (const json* v = find(root, "search")) {
        if (!v->is_object()) bad("'search' must be an object");
        reject_unknown(*v, "'search'", {"sos_min", "sos_max", "step"});
        const json* lo = find(*v, "sos_min");
        const json* hi = find(*v, "sos_max");
        const json* st = find(*v, "step");
        if (!lo || !hi || !st)
            bad("'search' needs sos_min, sos_max and step");
        if (!lo->is_number() || !hi->is_number() || !st->is_number())
            bad("'search' values must be numbers");
        cfg.search = SosSearchSpec(lo->get<double>(), hi->get<double>(),
                                   st->get<double>());
    }

    const json bf = get_obj(root, "beamform");
    reject_unknown(bf, "'beamform'",
                   {"n_x", "n_z", "x_min_mm", "x_max_mm", "z_min_mm", "z_max_mm",
                    "interpolation", "cache_dir", "distance_table_budget_mb"});
    const ImageGrid& dg = cfg.beamform.grid;
    cfg.beamform.grid =
        ImageGrid(get_int(bf, "n_x", dg.n_x), get_int(bf, "n_z", dg.n_z),
                  get_num(bf, "x_min_mm", dg.x_min * 1e3) * 1e-3,
                  get_num(bf, "x_max_mm", dg.x_max * 1e3) * 1e-3,
                  get_num(bf, "z_min_mm", dg.z_min * 1e3) * 1e-3,
                  get_num(bf, "z_max_mm", dg.z_max * 1e3) * 1e-3);
    const std::string interp = get_str(bf, "interpolation", "linear");
    if (interp == "linear")
        cfg.beamform.interpolation = Interpolation::Linear;
    else if (interp == "nearest")
        cfg.beamform.interpolation = Interpolation::Nearest;
    else
        bad("'interpolation' must be \"linear\" or \"nearest\"");
    cfg.beamform.cache_dir = get_str(bf, "cache_dir", cfg.beamform.cache_dir);
    const double budget_mb =
        get_num(bf, "distance_table_budget_mb",
                static_cast<double>(cfg.beamform.distance_table_budget_bytes) / (1 << 20));
    if (!(budget_mb >= 0.0)) bad("'distance_table_budget_mb' must be >= 0");
    cfg.beamform.distance_table_budget_bytes =
        static_cast<size_t>(budget_mb * (1 << 20));

    const json patch = get_obj(root, "patch");
    reject_unknown(patch, "'patch'",
                   {"layer_depths_mm", "jitter_step_mm", "jitter_count"});
    if (const json* v = find(patch, "layer_depths_mm")) {
        if (!v->is_array()) bad("'layer_depths_mm' must be an array of numbers");
        for (const json& d : *v) {
            if (!d.is_number()) bad("'layer_depths_mm' must be an array of numbers");
            cfg.patch.layer_depths_mm.push_back(d.get<double>());
        }
    }
    cfg.patch.jitter_step_mm = get_num(patch, "jitter_step_mm", cfg.patch.jitter_step_mm);
    cfg.patch.jitter_count = get_int(patch, "jitter_count", cfg.patch.jitter_count);
    validate_patch_spec(cfg.patch, cfg.beamform.grid);

    const json out = get_obj(root, "output");
    reject_unknown(out, "'output'", {"rf", "csv", "json", "pgm"});
    if (find(out, "rf")) cfg.out_rf = get_str(out, "rf", "");
    if (find(out, "csv")) cfg.out_csv = get_str(out, "csv", "");
    if (find(out, "json")) cfg.out_json = get_str(out, "json", "");
    if (find(out, "pgm")) cfg.out_pgm = get_str(out, "pgm", "");

    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

}  // namespace soscal
