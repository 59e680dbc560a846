#include "soscal/reference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "soscal/fft_util.hpp"

namespace soscal::reference {

namespace {

// Textbook DFT, forward sign convention matching FFTW (exp(-i 2 pi k n / N)).
std::vector<std::complex<double>> naive_dft(
    const std::vector<std::complex<double>>& in, bool inverse) {
    const int n = static_cast<int>(in.size());
    std::vector<std::complex<double>> out(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (int k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double ang = sign * 2.0 * std::numbers::pi * k * j / n;
            acc += in[j] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

}  // namespace

RFImage das_beamform(const RFChannelData& rf, int tx_index, double sos,
                     const BeamformConfig& cfg) {
    if (tx_index < 0 || tx_index >= rf.n_tx)
        throw ConfigError("tx_index out of range");
    if (!std::isfinite(sos) || sos <= 0.0)
        throw ConfigError("speed of sound must be positive and finite");
    const ImageGrid& g = cfg.grid;
    const TxEvent& ev = rf.tx_events[tx_index];
    const int n = rf.n_samples;

    std::vector<float> out(g.pixel_count());
    for (int ix = 0; ix < g.n_x; ++ix) {
        for (int iz = 0; iz < g.n_z; ++iz) {
            const double px = g.x(ix);
            const double pz = g.z(iz);
            const double tau_tx = tx_delay(px, pz, ev, sos);
            double acc = 0.0;
            for (int e = 0; e < rf.n_elements; ++e) {
                const double tau = tau_tx + rx_delay(px, pz, rf.probe.element_x(e), sos);
                const double u = (tau - rf.t0) * rf.sampling_frequency;
                if (!(u >= 0.0 && u <= n - 1)) continue;
                const float* trace = rf.trace(tx_index, e);
                if (cfg.interpolation == Interpolation::Nearest) {
                    const int idx = std::min(n - 1, static_cast<int>(u + 0.5));
                    acc += trace[idx];
                } else {
                    const int i0 = static_cast<int>(u);
                    if (i0 >= n - 1) {
                        acc += trace[n - 1];
                    } else {
                        const double frac = u - i0;
                        acc += (1.0 - frac) * trace[i0] + frac * trace[i0 + 1];
                    }
                }
            }
            out[static_cast<size_t>(ix) * g.n_z + iz] = static_cast<float>(acc);
        }
    }
    return RFImage(g, sos, tx_index, std::move(out));
}

RFChannelData simulate_channel_data(const ScattererField& field,
                                    const ProbeGeometry& probe,
                                    const std::vector<TxEvent>& tx_events,
                                    const SimConfig& cfg) {
    if (cfg.noise_std != 0.0)
        throw ConfigError("reference simulator does not synthesize noise");
    // Reuse the production record sizing (it is exact, not approximate) by
    // simulating an empty record of the right length, then fill it directly.
    RFChannelData rf = soscal::simulate_channel_data(field, probe, tx_events, cfg);
    std::fill(rf.samples.begin(), rf.samples.end(), 0.0f);

    const double fs = cfg.sampling_frequency;
    const double fc = probe.center_frequency;
    const double tail = kPulseTailSigmas * pulse_sigma(fc, cfg.pulse_cycles);
    std::vector<double> acc(rf.n_samples);
    for (int tx = 0; tx < rf.n_tx; ++tx) {
        for (int e = 0; e < rf.n_elements; ++e) {
            const double ex = probe.element_x(e);
            std::fill(acc.begin(), acc.end(), 0.0);
            for (size_t i = 0; i < field.count(); ++i) {
                const double tau =
                    tx_delay(field.x[i], field.z[i], rf.tx_events[tx], cfg.true_sos) +
                    rx_delay(field.x[i], field.z[i], ex, cfg.true_sos);
                for (int k = 0; k < rf.n_samples; ++k) {
                    const double t = k / fs - tau;
                    if (std::abs(t) > tail) continue;
                    acc[k] += field.amplitude[i] * pulse_value(t, fc, cfg.pulse_cycles);
                }
            }
            float* trace = rf.samples.data() + rf.trace_offset(tx, e);
            for (int k = 0; k < rf.n_samples; ++k)
                trace[k] = static_cast<float>(acc[k]);
        }
    }
    return rf;
}

EnvelopeImage envelope(const RFImage& img) {
    const int n_z = img.grid.n_z;
    if (n_z < 4) throw ConfigError("envelope: needs at least 4 axial samples");
    const int padded = fftutil::next_pow2(n_z);
    const int half = padded / 2;

    std::vector<float> out(img.values.size());
    for (int ix = 0; ix < img.grid.n_x; ++ix) {
        std::vector<std::complex<double>> line(padded, 0.0);
        for (int iz = 0; iz < n_z; ++iz) line[iz] = img.value(ix, iz);

        auto spec = naive_dft(line, false);
        for (int k = 1; k < half; ++k) spec[k] *= 2.0;
        for (int k = half + 1; k < padded; ++k) spec[k] = 0.0;
        auto analytic = naive_dft(spec, true);

        for (int iz = 0; iz < n_z; ++iz)
            out[static_cast<size_t>(ix) * n_z + iz] =
                static_cast<float>(std::abs(analytic[iz]));
    }
    return EnvelopeImage(img.grid, img.beamform_sos, std::move(out));
}

}  // namespace soscal::reference
