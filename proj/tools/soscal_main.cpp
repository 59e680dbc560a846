#include <cstdio>
#include <cstdlib>
#include <omp.h>

#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "soscal/container.hpp"
#include "soscal/estimator.hpp"
#include "soscal/imaging.hpp"
#include "soscal/report_io.hpp"
#include "soscal/run_config.hpp"
#include "soscal/sim.hpp"

using namespace soscal;

namespace {

// Flag values the user actually passed override the config file; everything
// else keeps the config (or built-in) defaults.
struct SweepFlags {
    std::string rf_path;
    std::string config_path;
    std::vector<std::string> metrics;
    double sos_min = 0.0, sos_max = 0.0, step = 0.0;
    std::string inputs;
    std::vector<double> layers;
    double jitter_step = 0.0;
    int jitter_count = 0;
    int n_x = 0, n_z = 0;
    double x_min_mm = 0.0, x_max_mm = 0.0, z_min_mm = 0.0, z_max_mm = 0.0;
    std::string interp;
    std::string cache_dir;
    std::string out_csv, out_json;
    bool strict = false;
};

void apply_threads(int flag_threads) {
    int threads = 0;
    if (const char* env = std::getenv("SOSCAL_THREADS")) threads = std::atoi(env);
    if (flag_threads > 0) threads = flag_threads;
    if (threads > 0) omp_set_num_threads(threads);
}

int cmd_simulate(const std::string& config_path, const std::string& out_flag,
                 std::optional<uint64_t> seed_flag) {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path);
    if (seed_flag) cfg.seed = *seed_flag;

    std::string out = out_flag;
    if (out.empty() && cfg.out_rf) out = *cfg.out_rf;
    if (out.empty())
        throw ConfigError("simulate: no output path (--out or config output.rf)");

    const std::vector<TxEvent> events = make_tx_events(cfg.probe, cfg.tx);
    const ScattererField field = make_scatterer_field(cfg.sim, cfg.seed);
    const RFChannelData rf =
        simulate_channel_data(field, cfg.probe, events, cfg.sim);
    write_rf_container(out, rf, cfg.sim.true_sos);

    nlohmann::json meta;
    meta["true_sos"] = cfg.sim.true_sos;
    meta["seed"] = cfg.seed;
    meta["scatterers"] = field.count();
    meta["n_tx"] = rf.n_tx;
    meta["n_elements"] = rf.n_elements;
    meta["n_samples"] = rf.n_samples;
    meta["sampling_frequency"] = rf.sampling_frequency;
    write_text_file(out + ".meta.json", meta.dump(2) + "\n");

    std::printf("scatterers: %zu\n", field.count());
    std::printf("true_sos: %g m/s\n", cfg.sim.true_sos);
    std::printf("wrote: %s\n", out.c_str());
    return 0;
}

int cmd_sweep(const SweepFlags& f, const CLI::App* cmd) {
    RunConfig cfg;
    if (!f.config_path.empty()) cfg = load_run_config(f.config_path);

    if (cmd->count("--metrics")) {
        cfg.metrics.clear();
        for (const std::string& name : f.metrics)
            cfg.metrics.push_back(metric_from_name(name));
    }
    if (cfg.metrics.empty())
        throw ConfigError("sweep: no metrics requested (--metrics)");

    const bool any_range = cmd->count("--sos-min") || cmd->count("--sos-max") ||
                           cmd->count("--step");
    if (any_range) {
        if (!(cmd->count("--sos-min") && cmd->count("--sos-max") &&
              cmd->count("--step")))
            throw ConfigError("sweep: --sos-min, --sos-max and --step go together");
        cfg.search = SosSearchSpec(f.sos_min, f.sos_max, f.step);
    }
    if (!cfg.search)
        throw ConfigError(
            "sweep: no search range (--sos-min/--sos-max/--step or config)");

    if (cmd->count("--inputs")) cfg.inputs = tx_selection_from_name(f.inputs);
    if (cmd->count("--layers")) cfg.patch.layer_depths_mm = f.layers;
    if (cmd->count("--jitter-step")) cfg.patch.jitter_step_mm = f.jitter_step;
    if (cmd->count("--jitter-count")) cfg.patch.jitter_count = f.jitter_count;

    ImageGrid grid = cfg.beamform.grid;
    if (cmd->count("--nx") || cmd->count("--nz") || cmd->count("--x-min-mm") ||
        cmd->count("--x-max-mm") || cmd->count("--z-min-mm") ||
        cmd->count("--z-max-mm")) {
        grid = ImageGrid(cmd->count("--nx") ? f.n_x : grid.n_x,
                         cmd->count("--nz") ? f.n_z : grid.n_z,
                         cmd->count("--x-min-mm") ? f.x_min_mm * 1e-3 : grid.x_min,
                         cmd->count("--x-max-mm") ? f.x_max_mm * 1e-3 : grid.x_max,
                         cmd->count("--z-min-mm") ? f.z_min_mm * 1e-3 : grid.z_min,
                         cmd->count("--z-max-mm") ? f.z_max_mm * 1e-3 : grid.z_max);
        cfg.beamform.grid = grid;
    }
    if (cmd->count("--interp")) {
        if (f.interp == "linear")
            cfg.beamform.interpolation = Interpolation::Linear;
        else if (f.interp == "nearest")
            cfg.beamform.interpolation = Interpolation::Nearest;
        else
            throw ConfigError("sweep: --interp must be linear or nearest");
    }
    if (cmd->count("--cache-dir")) cfg.beamform.cache_dir = f.cache_dir;

    const LoadedRf loaded = read_rf_container(f.rf_path);
    SweepRequest req{.metrics = cfg.metrics,
                     .spec = *cfg.search,
                     .inputs = cfg.inputs,
                     .patch = cfg.patch,
                     .params = {},
                     .beamform = cfg.beamform};
    const std::vector<SweepResult> results = run_sweep(loaded.data, req);

    std::string out_csv = f.out_csv;
    if (out_csv.empty() && cfg.out_csv) out_csv = *cfg.out_csv;
    std::string out_json = f.out_json;
    if (out_json.empty() && cfg.out_json) out_json = *cfg.out_json;
    if (!out_csv.empty()) write_text_file(out_csv, sweep_csv(results));
    if (!out_json.empty())
        write_text_file(out_json, sweep_summary_json(results, cfg.inputs));

    bool any_degenerate = false;
    for (const SweepResult& r : results) {
        std::printf("%s layer %gmm #%d j%d: s* = %g m/s (ties %d)%s\n",
                    metric_name(r.metric).c_str(), r.patch.layer_depth_mm,
                    r.patch.layer_index, r.patch.jitter_index, r.best_sos,
                    r.tie_count, r.degenerate ? " [degenerate]" : "");
        any_degenerate = any_degenerate || r.degenerate;
    }
    if (!out_csv.empty()) std::printf("wrote: %s\n", out_csv.c_str());
    if (!out_json.empty()) std::printf("wrote: %s\n", out_json.c_str());

    if (any_degenerate) {
        std::fprintf(stderr, "warning: degenerate sweep, all candidates tie\n");
        if (f.strict)
            throw DegenerateError("sweep: degenerate all-tie result under --strict");
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& sweep_paths, double gt,
               const std::string& out_json) {
    std::vector<SweepResult> all;
    for (const std::string& path : sweep_paths) {
        std::vector<SweepResult> part = read_sweep_summary(path);
        all.insert(all.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    }
    const EstimateReport report = aggregate_errors(all, gt);
    const std::vector<double> timings = mean_eval_seconds_per_metric(report, all);

    std::fputs(report_table(report, timings).c_str(), stdout);
    if (!out_json.empty()) {
        write_text_file(out_json, report_json(report, gt, timings));
        std::printf("wrote: %s\n", out_json.c_str());
    }
    return 0;
}

int cmd_bmode(const std::string& rf_path, double sos, const std::string& inputs,
              int tx_index, const std::string& out_pgm,
              const std::string& out_bmode, const CLI::App* cmd) {
    const LoadedRf loaded = read_rf_container(rf_path);
    BeamformConfig cfg;

    std::vector<int> tx;
    if (cmd->count("--tx"))
        tx.push_back(tx_index);
    else
        tx = select_tx_indices(loaded.data.tx_events,
                               tx_selection_from_name(inputs));

    DasWorkspace workspace(loaded.data, cfg);
    std::vector<RFImage> frames;
    frames.reserve(tx.size());
    for (int t : tx) frames.push_back(workspace.beamform(t, sos));
    const BModeImage bmode = log_compress(envelope(compound(frames)));

    if (!out_pgm.empty()) {
        write_pgm(out_pgm, bmode);
        std::printf("wrote: %s\n", out_pgm.c_str());
    }
    if (!out_bmode.empty()) {
        write_bmode_image(out_bmode, bmode);
        std::printf("wrote: %s\n", out_bmode.c_str());
    }
    if (out_pgm.empty() && out_bmode.empty())
        throw ConfigError("bmode: no output path (--out or --out-bmode)");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"global speed-of-sound estimation from raw ultrasound channel data"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    app.add_option("--threads", threads, "worker thread count (overrides SOSCAL_THREADS)");

    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "synthesize a point-scatterer phantom acquisition");
    std::string sim_config, sim_out;
    uint64_t sim_seed = 0;
    sim_cmd->add_option("--config", sim_config, "experiment config JSON");
    sim_cmd->add_option("--out", sim_out, "output RF container path");
    CLI::Option* seed_opt = sim_cmd->add_option("--seed", sim_seed, "scatterer seed");

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "score candidate speeds with image metrics");
    SweepFlags sf;
    sweep_cmd->add_option("rf", sf.rf_path, "RF container path")->required();
    sweep_cmd->add_option("--config", sf.config_path, "experiment config JSON");
    sweep_cmd->add_option("--metrics", sf.metrics, "metric names")->delimiter(',');
    sweep_cmd->add_option("--sos-min", sf.sos_min, "lowest candidate [m/s]");
    sweep_cmd->add_option("--sos-max", sf.sos_max, "highest candidate [m/s]");
    sweep_cmd->add_option("--step", sf.step, "candidate step [m/s]");
    sweep_cmd->add_option("--inputs", sf.inputs, "frame selection: single|dual|full");
    sweep_cmd->add_option("--layers", sf.layers, "layer depths [mm]")->delimiter(',');
    sweep_cmd->add_option("--jitter-step", sf.jitter_step, "layer jitter step [mm]");
    sweep_cmd->add_option("--jitter-count", sf.jitter_count, "jitter positions per layer");
    sweep_cmd->add_option("--nx", sf.n_x, "lateral pixel count");
    sweep_cmd->add_option("--nz", sf.n_z, "axial pixel count");
    sweep_cmd->add_option("--x-min-mm", sf.x_min_mm, "grid left edge [mm]");
    sweep_cmd->add_option("--x-max-mm", sf.x_max_mm, "grid right edge [mm]");
    sweep_cmd->add_option("--z-min-mm", sf.z_min_mm, "grid top edge [mm]");
    sweep_cmd->add_option("--z-max-mm", sf.z_max_mm, "grid bottom edge [mm]");
    sweep_cmd->add_option("--interp", sf.interp, "sample interpolation: linear|nearest");
    sweep_cmd->add_option("--cache-dir", sf.cache_dir, "beamformed-image cache directory");
    sweep_cmd->add_option("--out-csv", sf.out_csv, "score table CSV path");
    sweep_cmd->add_option("--out-json", sf.out_json, "sweep summary JSON path");
    sweep_cmd->add_flag("--strict", sf.strict, "degenerate sweeps exit with an error");

    CLI::App* report_cmd =
        app.add_subcommand("report", "aggregate sweep summaries against ground truth");
    std::vector<std::string> report_paths;
    double report_gt = 0.0;
    std::string report_out;
    report_cmd->add_option("sweeps", report_paths, "sweep summary JSON files")
        ->required();
    report_cmd->add_option("--gt", report_gt, "ground-truth SoS [m/s]")->required();
    report_cmd->add_option("--out-json", report_out, "report JSON path");

    CLI::App* bmode_cmd =
        app.add_subcommand("bmode", "beamform one B-mode image at a fixed SoS");
    std::string bm_rf, bm_inputs = "single", bm_pgm, bm_out;
    double bm_sos = 0.0;
    int bm_tx = 0;
    bmode_cmd->add_option("rf", bm_rf, "RF container path")->required();
    bmode_cmd->add_option("--sos", bm_sos, "beamforming SoS [m/s]")->required();
    bmode_cmd->add_option("--inputs", bm_inputs, "frame selection: single|dual|full");
    bmode_cmd->add_option("--tx", bm_tx, "beamform exactly this transmit index");
    bmode_cmd->add_option("--out", bm_pgm, "PGM image path");
    bmode_cmd->add_option("--out-bmode", bm_out, "B-mode container path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        apply_threads(threads);
        if (*sim_cmd)
            return cmd_simulate(sim_config, sim_out,
                                seed_opt->count() ? std::optional<uint64_t>(sim_seed)
                                                  : std::nullopt);
        if (*sweep_cmd) return cmd_sweep(sf, sweep_cmd);
        if (*report_cmd) return cmd_report(report_paths, report_gt, report_out);
        if (*bmode_cmd)
            return cmd_bmode(bm_rf, bm_sos, bm_inputs, bm_tx, bm_pgm, bm_out,
                             bmode_cmd);
    } catch (const ArityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const DegenerateError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
