#pragma once

#include <cstdint>
#include <vector>

#include "soscal/types.hpp"

// Point-scatterer time-of-flight simulator. A homogeneous medium of known SoS
// is populated with discrete scatterers; each transmit event launches a
// diverging wave from its virtual source and every element records the linear
// superposition of scatterer echoes. This is a first-order (single
// scattering) model: enough to make images defocus and misregister when
// beamformed at the wrong SoS, which is what the estimator exploits. No
// directivity, attenuation or multiple scattering.

namespace soscal {

// Scatterers land on a fixed lattice with this spacing.
inline constexpr double kScattererLatticeSpacing = 75e-6;  // [m]

// Base scatterer amplitude scale. Calibrated once against the default config
// (40x55 mm domain, density 0.10, 5 MHz / 3-cycle pulse, 128 elements) so the
// per-channel RMS of the noiseless signal is ~1.
inline constexpr double kScattererAmplitudeBase = 0.099;

struct SimConfig {
    double true_sos = 1540.0;         // ground-truth SoS [m/s]
    double domain_width = 40e-3;      // lateral extent, centered on x = 0 [m]
    double domain_depth = 55e-3;      // axial extent from the array face [m]
    double scatterer_density = 0.10;  // occupied fraction of lattice sites, (0, 1]
    double pulse_cycles = 3.0;        // FWHM of the pulse envelope in carrier cycles
    double sampling_frequency = 40e6; // [Hz]
    double noise_std = 0.0;           // additive Gaussian noise relative to signal peak
    double amplitude_scale = 1.0;     // scatterer strength spread multiplier
    int max_samples = 1 << 20;        // record-length cap
};

void validate_sim_config(const SimConfig& cfg);

struct ScattererField {
    std::vector<double> x;          // [m]
    std::vector<double> z;          // [m], all > 0
    std::vector<double> amplitude;
    uint64_t seed = 0;

    ScattererField() = default;
    ScattererField(std::vector<double> x_, std::vector<double> z_,
                   std::vector<double> amplitude_, uint64_t seed_);

    size_t count() const { return x.size(); }
};

// Occupies round(density * site_count) sites of the lattice covering the
// domain (x in [-width/2, width/2] inclusive, z in (0, depth]), chosen
// uniformly without replacement; amplitudes are standard normal draws scaled
// by kScattererAmplitudeBase * amplitude_scale. Deterministic given seed.
ScattererField make_scatterer_field(const SimConfig& cfg, uint64_t seed);

// Gaussian-windowed cosine with unit peak at t = 0 and an envelope FWHM of
// pulse_cycles carrier periods. The synthesized pulse is cut off beyond
// kPulseTailSigmas envelope standard deviations from the peak.
double pulse_value(double t, double center_frequency, double pulse_cycles);
double pulse_sigma(double center_frequency, double pulse_cycles);
inline constexpr double kPulseTailSigmas = 4.0;

// Echo records for every (tx event, element) pair. Record length is sized to
// the farthest echo plus the pulse tail; exceeding cfg.max_samples is an
// error ("record too long"). Noise (if configured) is seeded from
// field.seed, so the output is a pure function of its arguments.
RFChannelData simulate_channel_data(const ScattererField& field,
                                    const ProbeGeometry& probe,
                                    const std::vector<TxEvent>& tx_events,
                                    const SimConfig& cfg);

// Symmetric fan of count virtual sources at depth vs_z, laterally spaced by
// vs_spacing and centered on x = 0, sorted by vs_x. count = 1 gives a single
// centered VS, count = 2 the symmetric pair at ±vs_spacing/2.
std::vector<TxEvent> make_virtual_source_events(const ProbeGeometry& probe,
                                                int count, double vs_spacing,
                                                double vs_z, int aperture_size);

}  // namespace soscal
