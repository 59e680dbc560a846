#include "soscal/sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "rng_util.hpp"

namespace soscal {

namespace {

constexpr double kFwhmToSigma = 2.3548200450309493;  // 2*sqrt(2*ln 2)

}  // namespace

double pulse_sigma(double center_frequency, double pulse_cycles) {
    return pulse_cycles / center_frequency / kFwhmToSigma;
}

void validate_sim_config(const SimConfig& cfg) {
    auto bad = [](const std::string& msg) { throw ConfigError("sim config: " + msg); };
    if (!(std::isfinite(cfg.true_sos) && cfg.true_sos > 0.0))
        bad("true_sos must be > 0");
    if (!(std::isfinite(cfg.domain_width) && cfg.domain_width > 0.0))
        bad("domain_width must be > 0");
    if (!(std::isfinite(cfg.domain_depth) && cfg.domain_depth > 0.0))
        bad("domain_depth must be > 0");
    if (!(std::isfinite(cfg.scatterer_density) && cfg.scatterer_density > 0.0 &&
          cfg.scatterer_density <= 1.0))
        bad("scatterer_density must lie in (0, 1]");
    if (!(std::isfinite(cfg.pulse_cycles) && cfg.pulse_cycles >= 1.0))
        bad("pulse_cycles must be >= 1");
    if (!(std::isfinite(cfg.sampling_frequency) && cfg.sampling_frequency > 0.0))
        bad("sampling_frequency must be > 0");
    if (!(std::isfinite(cfg.noise_std) && cfg.noise_std >= 0.0))
        bad("noise_std must be >= 0");
    if (!(std::isfinite(cfg.amplitude_scale) && cfg.amplitude_scale > 0.0))
        bad("amplitude_scale must be > 0");
    if (cfg.max_samples < 16) bad("max_samples too small");
}

ScattererField::ScattererField(std::vector<double> x_, std::vector<double> z_,
                               std::vector<double> amplitude_, uint64_t seed_)
    : x(std::move(x_)), z(std::move(z_)), amplitude(std::move(amplitude_)),
      seed(seed_) {
    if (x.size() != z.size() || x.size() != amplitude.size())
        throw ConfigError("scatterer field: coordinate/amplitude lengths differ");
    for (size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(z[i]) || !std::isfinite(amplitude[i]))
            throw ConfigError("scatterer field: non-finite entry");
        if (z[i] <= 0.0)
            throw ConfigError("scatterer field: scatterers must lie inside the medium (z > 0)");
    }
}

ScattererField make_scatterer_field(const SimConfig& cfg, uint64_t seed) {
    validate_sim_config(cfg);
    const double s = kScattererLatticeSpacing;
    // x sites span the width inclusively; z sites start one spacing below the
    // array face so every scatterer satisfies z > 0
    const int nx = static_cast<int>(std::floor(cfg.domain_width / s)) + 1;
    const int nz = static_cast<int>(std::floor(cfg.domain_depth / s));
    if (nz < 1) throw ConfigError("sim config: domain_depth shallower than the lattice");
    const size_t n_sites = static_cast<size_t>(nx) * nz;
    const size_t n_pick =
        static_cast<size_t>(std::llround(cfg.scatterer_density * static_cast<double>(n_sites)));
    if (n_pick == 0) throw ConfigError("empty medium: density selects zero scatterers");

    // uniform sample without replacement: partial Fisher-Yates over site ids
    rngutil::Rng rng(seed);
    std::vector<uint32_t> sites(n_sites);
    std::iota(sites.begin(), sites.end(), 0u);
    for (size_t i = 0; i < n_pick; ++i) {
        const size_t j = i + static_cast<size_t>(rng.bounded(n_sites - i));
        std::swap(sites[i], sites[j]);
    }
    sites.resize(n_pick);
    std::sort(sites.begin(), sites.end());

    const double x0 = -0.5 * cfg.domain_width;
    const double amp_scale = kScattererAmplitudeBase * cfg.amplitude_scale;
    std::vector<double> xs(n_pick), zs(n_pick), amps(n_pick);
    for (size_t i = 0; i < n_pick; ++i) {
        const uint32_t ix = sites[i] % nx;
        const uint32_t iz = sites[i] / nx;
        xs[i] = x0 + ix * s;
        zs[i] = (iz + 1) * s;
        amps[i] = amp_scale * rng.gauss();
    }
    return ScattererField(std::move(xs), std::move(zs), std::move(amps), seed);
}

double pulse_value(double t, double center_frequency, double pulse_cycles) {
    const double sigma = pulse_sigma(center_frequency, pulse_cycles);
    return std::cos(2.0 * std::numbers::pi * center_frequency * t) *
           std::exp(-0.5 * t * t / (sigma * sigma));
}

// Transmit wavefront delay shared with the beamformer: time after the
// diverging wave crosses the array face on the VS axis.
static double tx_wavefront_delay(double px, double pz, const TxEvent& ev,
                                 double sos) {
    const double dx = px - ev.vs_x;
    const double dz = pz - ev.vs_z;
    return (std::sqrt(dx * dx + dz * dz) - std::abs(ev.vs_z)) / sos;
}

RFChannelData simulate_channel_data(const ScattererField& field,
                                    const ProbeGeometry& probe,
                                    const std::vector<TxEvent>& tx_events,
                                    const SimConfig& cfg) {
    validate_sim_config(cfg);
    if (tx_events.empty()) throw ConfigError("simulate: no tx events");
    for (const TxEvent& ev : tx_events) validate_tx_event(ev, probe);
    for (size_t i = 0; i < field.count(); ++i) {
        if (std::abs(field.x[i]) > 0.5 * cfg.domain_width + 1e-12 ||
            field.z[i] > cfg.domain_depth + 1e-12)
            throw ConfigError("simulate: scatterer outside the domain");
    }

    const int n_tx = static_cast<int>(tx_events.size());
    const int n_el = probe.element_count;
    const double fs = cfg.sampling_frequency;
    const double fc = probe.center_frequency;
    const double sigma = pulse_sigma(fc, cfg.pulse_cycles);
    const double tail = kPulseTailSigmas * sigma;
    const double c = cfg.true_sos;

    // exact latest arrival: per scatterer the receive distance is maximized at
    // one of the two end elements (colinear array)
    double t_max = 0.0;
    const double ex_first = probe.element_x(0);
    const double ex_last = probe.element_x(n_el - 1);
    for (int tx = 0; tx < n_tx; ++tx) {
        const TxEvent& ev = tx_events[tx];
        for (size_t i = 0; i < field.count(); ++i) {
            const double tau_tx = tx_wavefront_delay(field.x[i], field.z[i], ev, c);
            const double d1 = std::hypot(field.x[i] - ex_first, field.z[i]);
            const double d2 = std::hypot(field.x[i] - ex_last, field.z[i]);
            t_max = std::max(t_max, tau_tx + std::max(d1, d2) / c);
        }
    }
    const int n_samples =
        std::max(16, static_cast<int>(std::ceil((t_max + tail) * fs)) + 1);
    if (n_samples > cfg.max_samples)
        throw ConfigError("record too long: " + std::to_string(n_samples) +
                          " samples exceed the cap of " +
                          std::to_string(cfg.max_samples));

    const size_t total = static_cast<size_t>(n_tx) * n_el * n_samples;
    std::vector<double> acc(total, 0.0);

    // Per-sample pulse values come from incremental recurrences (complex
    // rotation for the carrier, ratio chain for the Gaussian) so the inner
    // loop is transcendental-free. Each (tx, element) trace is owned by one
    // iteration, making the result independent of the thread count.
    const double dt = 1.0 / fs;
    const double inv_sig2 = 1.0 / (sigma * sigma);
    const double gauss_step = std::exp(-dt * dt * inv_sig2);
    const std::complex<double> rot(std::cos(2.0 * std::numbers::pi * fc * dt),
                                   std::sin(2.0 * std::numbers::pi * fc * dt));

#pragma omp parallel for collapse(2) schedule(static)
    for (int tx = 0; tx < n_tx; ++tx) {
        for (int e = 0; e < n_el; ++e) {
            const TxEvent& ev = tx_events[tx];
            const double ex = probe.element_x(e);
            double* trace = acc.data() + (static_cast<size_t>(tx) * n_el + e) *
                                             static_cast<size_t>(n_samples);
            for (size_t i = 0; i < field.count(); ++i) {
                const double tau = tx_wavefront_delay(field.x[i], field.z[i], ev, c) +
                                   std::hypot(field.x[i] - ex, field.z[i]) / c;
                const int i0 = std::max(0, static_cast<int>(std::ceil((tau - tail) * fs)));
                const int i1 = std::min(n_samples - 1,
                                        static_cast<int>(std::floor((tau + tail) * fs)));
                if (i0 > i1) continue;

                const double u0 = i0 * dt - tau;
                double g = std::exp(-0.5 * u0 * u0 * inv_sig2);
                double gstep = std::exp(-(u0 * dt + 0.5 * dt * dt) * inv_sig2);
                std::complex<double> carrier(
                    std::cos(2.0 * std::numbers::pi * fc * u0),
                    std::sin(2.0 * std::numbers::pi * fc * u0));
                const double a = field.amplitude[i];
                for (int k = i0; k <= i1; ++k) {
                    trace[k] += a * g * carrier.real();
                    g *= gstep;
                    gstep *= gauss_step;
                    carrier *= rot;
                }
            }
        }
    }

    double peak = 0.0;
    for (double v : acc) peak = std::max(peak, std::abs(v));

    if (cfg.noise_std > 0.0 && peak > 0.0) {
        const double noise = cfg.noise_std * peak;
#pragma omp parallel for collapse(2) schedule(static)
        for (int tx = 0; tx < n_tx; ++tx) {
            for (int e = 0; e < n_el; ++e) {
                rngutil::Rng rng(rngutil::mix(field.seed ^ 0xA5C39ED1ull,
                                              static_cast<uint64_t>(tx) * 131071u + e));
                double* trace = acc.data() + (static_cast<size_t>(tx) * n_el + e) *
                                                 static_cast<size_t>(n_samples);
                for (int k = 0; k < n_samples; ++k) trace[k] += noise * rng.gauss();
            }
        }
    }

    std::vector<float> samples(total);
    for (size_t i = 0; i < total; ++i) samples[i] = static_cast<float>(acc[i]);
    return RFChannelData(n_tx, n_el, n_samples, fs, 0.0, probe, tx_events,
                         std::move(samples));
}

std::vector<TxEvent> make_virtual_source_events(const ProbeGeometry& probe,
                                                int count, double vs_spacing,
                                                double vs_z, int aperture_size) {
    if (count < 1) throw ConfigError("tx events: count must be >= 1");
    if (count > 1 && !(std::isfinite(vs_spacing) && vs_spacing > 0.0))
        throw ConfigError("tx events: vs_spacing must be > 0");
    if (!(std::isfinite(vs_z) && vs_z < 0.0))
        throw ConfigError("tx events: vs_z must be < 0 (behind the array)");

    std::vector<TxEvent> events;
    events.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double vs_x = (i - 0.5 * (count - 1)) * vs_spacing;
        const int center = static_cast<int>(
            std::llround(vs_x / probe.pitch + 0.5 * (probe.element_count - 1)));
        TxEvent ev{vs_x, vs_z, center, aperture_size};
        validate_tx_event(ev, probe);
        events.push_back(ev);
    }
    return events;
}

}  // namespace soscal
