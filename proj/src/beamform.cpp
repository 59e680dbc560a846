#include "soscal/beamform.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <utility>

#include "soscal/container.hpp"

namespace soscal {

namespace {

// Receive distance in single precision. Table construction and the inline
// fallback both go through here so memoization never changes a result.
inline float rx_distance_f(double px, double pz, double ex) {
    const float dx = static_cast<float>(px - ex);
    const float z = static_cast<float>(pz);
    return std::sqrt(dx * dx + z * z);
}

inline float tx_distance_f(double px, double pz, const TxEvent& ev) {
    const double dx = px - ev.vs_x;
    const double dz = pz - ev.vs_z;
    return static_cast<float>(std::sqrt(dx * dx + dz * dz) - std::fabs(ev.vs_z));
}

// Sample the trace at fractional index u; outside [0, n-1] the tap is zero.
inline float sample_trace(const float* trace, int n, float u, Interpolation interp) {
    if (!(u >= 0.0f && u <= static_cast<float>(n - 1))) return 0.0f;
    if (interp == Interpolation::Nearest) {
        const int idx = static_cast<int>(u + 0.5f);
        return trace[idx < n ? idx : n - 1];
    }
    const int i0 = static_cast<int>(u);
    if (i0 >= n - 1) return trace[n - 1];
    const float frac = u - static_cast<float>(i0);
    return trace[i0] + frac * (trace[i0 + 1] - trace[i0]);
}

uint64_t fnv1a(const void* data, size_t n, uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

template <typename T>
uint64_t fnv1a_value(const T& v, uint64_t h) {
    return fnv1a(&v, sizeof(T), h);
}

void validate_beamform_args(const RFChannelData& rf, int tx_index, double sos) {
    if (tx_index < 0 || tx_index >= rf.n_tx)
        throw ConfigError("tx_index " + std::to_string(tx_index) +
                          " out of range for " + std::to_string(rf.n_tx) +
                          " transmit events");
    if (!std::isfinite(sos) || sos <= 0.0)
        throw ConfigError("speed of sound must be positive and finite");
}

}  // namespace

ImageGrid default_beamform_grid() {
    return ImageGrid(256, 3072, -19e-3, 19e-3, 8e-3, 40e-3);
}

double tx_delay(double px, double pz, const TxEvent& ev, double sos) {
    return (std::hypot(px - ev.vs_x, pz - ev.vs_z) - std::fabs(ev.vs_z)) / sos;
}

double rx_delay(double px, double pz, double element_x, double sos) {
    return std::hypot(px - element_x, pz) / sos;
}

DasWorkspace::DasWorkspace(const RFChannelData& rf_, const BeamformConfig& cfg_)
    : rf(rf_), cfg(cfg_) {
    const ImageGrid& g = cfg.grid;
    px.resize(g.n_x);
    pz.resize(g.n_z);
    for (int ix = 0; ix < g.n_x; ++ix) px[ix] = g.x(ix);
    for (int iz = 0; iz < g.n_z; ++iz) pz[iz] = g.z(iz);
    ex.resize(rf.n_elements);
    for (int e = 0; e < rf.n_elements; ++e) ex[e] = rf.probe.element_x(e);

    const size_t n_px = g.pixel_count();
    tx_dist.resize(rf.n_tx);
    for (int tx = 0; tx < rf.n_tx; ++tx) {
        auto& d = tx_dist[tx];
        d.resize(n_px);
        const TxEvent& ev = rf.tx_events[tx];
#pragma omp parallel for schedule(static)
        for (int ix = 0; ix < g.n_x; ++ix)
            for (int iz = 0; iz < g.n_z; ++iz)
                d[static_cast<size_t>(ix) * g.n_z + iz] = tx_distance_f(px[ix], pz[iz], ev);
    }

    const size_t table_bytes = n_px * rf.n_elements * sizeof(float);
    if (table_bytes <= cfg.distance_table_budget_bytes) {
        rx_dist.resize(n_px * rf.n_elements);
#pragma omp parallel for schedule(static)
        for (int ix = 0; ix < g.n_x; ++ix)
            for (int iz = 0; iz < g.n_z; ++iz) {
                float* row = rx_dist.data() +
                             (static_cast<size_t>(ix) * g.n_z + iz) * rf.n_elements;
                for (int e = 0; e < rf.n_elements; ++e)
                    row[e] = rx_distance_f(px[ix], pz[iz], ex[e]);
            }
    }

    if (!cfg.cache_dir.empty()) {
        uint64_t h = 0xcbf29ce484222325ull;
        h = fnv1a_value(rf.n_tx, h);
        h = fnv1a_value(rf.n_elements, h);
        h = fnv1a_value(rf.n_samples, h);
        h = fnv1a_value(rf.sampling_frequency, h);
        h = fnv1a_value(rf.t0, h);
        h = fnv1a_value(rf.probe.pitch, h);
        for (const TxEvent& ev : rf.tx_events) {
            h = fnv1a_value(ev.vs_x, h);
            h = fnv1a_value(ev.vs_z, h);
        }
        h = fnv1a(rf.samples.data(), rf.samples.size() * sizeof(float), h);
        content_key = h;
    }
}

RFImage DasWorkspace::compute(int tx_index, double sos) const {
    const ImageGrid& g = cfg.grid;
    const int n_el = rf.n_elements;
    const int n_s = rf.n_samples;
    const float scale = static_cast<float>(rf.sampling_frequency / sos);
    const float t0_samples = static_cast<float>(rf.t0 * rf.sampling_frequency);
    const float* txd = tx_dist[tx_index].data();
    const Interpolation interp = cfg.interpolation;

    std::vector<float> out(g.pixel_count());
#pragma omp parallel for schedule(static)
    for (int ix = 0; ix < g.n_x; ++ix) {
        for (int iz = 0; iz < g.n_z; ++iz) {
            const size_t pix = static_cast<size_t>(ix) * g.n_z + iz;
            const float* rx_row =
                rx_dist.empty() ? nullptr : rx_dist.data() + pix * n_el;
            const float tx_d = txd[pix];
            double acc = 0.0;
            for (int e = 0; e < n_el; ++e) {
                const float rx_d =
                    rx_row ? rx_row[e] : rx_distance_f(px[ix], pz[iz], ex[e]);
                const float u = (tx_d + rx_d) * scale - t0_samples;
                acc += sample_trace(rf.trace(tx_index, e), n_s, u, interp);
            }
            out[pix] = static_cast<float>(acc);
        }
    }
    return RFImage(g, sos, tx_index, std::move(out));
}

RFImage DasWorkspace::beamform(int tx_index, double sos) const {
    validate_beamform_args(rf, tx_index, sos);
    if (cfg.cache_dir.empty()) return compute(tx_index, sos);

    uint64_t key = fnv1a_value(tx_index, content_key);
    key = fnv1a_value(sos, key);
    key = fnv1a_value(cfg.grid.n_x, key);
    key = fnv1a_value(cfg.grid.n_z, key);
    key = fnv1a_value(cfg.grid.x_min, key);
    key = fnv1a_value(cfg.grid.x_max, key);
    key = fnv1a_value(cfg.grid.z_min, key);
    key = fnv1a_value(cfg.grid.z_max, key);
    key = fnv1a_value(static_cast<int>(cfg.interpolation), key);
    char name[40];
    std::snprintf(name, sizeof(name), "das_%016llx.rfc",
                  static_cast<unsigned long long>(key));
    const auto path = std::filesystem::path(cfg.cache_dir) / name;

    if (std::filesystem::exists(path)) {
        try {
            RFImage img = read_rf_image(path.string());
            if (img.grid == cfg.grid && img.beamform_sos == sos &&
                img.tx_index == tx_index)
                return img;
        } catch (const Error&) {
            // stale or damaged entry, fall through and recompute
        }
    }

    RFImage img = compute(tx_index, sos);
    try {
        std::filesystem::create_directories(cfg.cache_dir);
        const auto tmp = path.string() + ".tmp";
        write_rf_image(tmp, img);
        std::filesystem::rename(tmp, path);
    } catch (const std::exception&) {
        // caching is best effort; the computed image is still valid
    }
    return img;
}

RFImage das_beamform(const RFChannelData& rf, int tx_index, double sos,
                     const BeamformConfig& cfg) {
    return DasWorkspace(rf, cfg).beamform(tx_index, sos);
}

BeamformSweep beamform_sweep(const RFChannelData& rf,
                             const std::vector<int>& tx_indices,
                             const SosSearchSpec& spec, const BeamformConfig& cfg) {
    if (tx_indices.empty())
        throw ConfigError("beamform_sweep requires at least one transmit index");
    BeamformSweep sweep;
    sweep.tx_indices = tx_indices;
    sweep.candidates = spec.candidates();
    sweep.images.reserve(sweep.candidates.size() * tx_indices.size());
    DasWorkspace ws(rf, cfg);
    for (double s : sweep.candidates)
        for (int tx : tx_indices) sweep.images.push_back(ws.beamform(tx, s));
    return sweep;
}

}  // namespace soscal
