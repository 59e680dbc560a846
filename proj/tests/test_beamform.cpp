#include <cmath>
#include <cstdint>
#include <filesystem>
#include <omp.h>
#include <random>

#include "doctest.h"
#include "soscal/beamform.hpp"
#include "soscal/imaging.hpp"
#include "soscal/reference.hpp"
#include "soscal/sim.hpp"

using namespace soscal;

namespace {

TxEvent centered_vs(const ProbeGeometry& probe, double vs_z) {
    return TxEvent{0.0, vs_z, (probe.element_count - 1) / 2,
                   probe.element_count % 2 ? probe.element_count : probe.element_count - 1};
}

ProbeGeometry small_probe() { return ProbeGeometry(64, 0.3e-3, 5e6); }

// channel data with deterministic pseudo-random samples, smooth enough to
// interpolate (adjacent samples correlate via a two-tap average)
RFChannelData random_channel_data(int n_tx, int n_el, int n_samples, double fs,
                                  uint32_t seed) {
    ProbeGeometry probe(n_el, 0.3e-3, 5e6);
    std::vector<TxEvent> events;
    for (int tx = 0; tx < n_tx; ++tx)
        events.push_back(centered_vs(probe, -9e-3 - tx * 1e-3));
    std::mt19937 gen(seed);
    auto draw = [&gen] {
        return static_cast<float>(static_cast<int32_t>(gen())) * (1.0f / 2147483648.0f);
    };
    std::vector<float> samples(static_cast<size_t>(n_tx) * n_el * n_samples);
    float prev = 0.0f;
    for (auto& s : samples) {
        const float raw = draw();
        s = 0.5f * (raw + prev);
        prev = raw;
    }
    return RFChannelData(n_tx, n_el, n_samples, fs, 0.0, probe, events,
                         std::move(samples));
}

// single unit scatterer simulated with a centered virtual source
RFChannelData single_scatterer_data(double x, double z, double true_sos,
                                    double fs = 40e6) {
    ProbeGeometry probe = small_probe();
    SimConfig cfg;
    cfg.true_sos = true_sos;
    cfg.domain_width = 40e-3;
    cfg.domain_depth = 30e-3;
    cfg.sampling_frequency = fs;
    ScattererField field({x}, {z}, {1.0}, 7);
    auto events = make_virtual_source_events(probe, 1, 1.8e-3, -9e-3, 63);
    return simulate_channel_data(field, probe, events, cfg);
}

std::pair<double, double> envelope_peak_position(const EnvelopeImage& env) {
    size_t best = 0;
    for (size_t i = 1; i < env.values.size(); ++i)
        if (env.values[i] > env.values[best]) best = i;
    const int ix = static_cast<int>(best) / env.grid.n_z;
    const int iz = static_cast<int>(best) % env.grid.n_z;
    return {env.grid.x(ix), env.grid.z(iz)};
}

float envelope_peak_value(const EnvelopeImage& env) {
    float best = 0.0f;
    for (float v : env.values) best = std::max(best, v);
    return best;
}

}  // namespace

TEST_CASE("transmit delay matches hand-computed values") {
    TxEvent ev{0.0, -9e-3, 31, 63};
    // point at (0, 20 mm): |p - vs| = 29 mm, minus 9 mm, over 1500 m/s
    CHECK(tx_delay(0.0, 20e-3, ev, 1500.0) ==
          doctest::Approx(20e-3 / 1500.0).epsilon(1e-12));
    // the wavefront reaches the array face on the VS axis at t = 0
    CHECK(tx_delay(0.0, 0.0, ev, 1500.0) == 0.0);
    // doubling the SoS halves the delay
    CHECK(tx_delay(3e-3, 25e-3, ev, 3000.0) ==
          doctest::Approx(0.5 * tx_delay(3e-3, 25e-3, ev, 1500.0)).epsilon(1e-12));
}

TEST_CASE("receive delay matches hand-computed values") {
    CHECK(rx_delay(0.0, 30e-3, 0.0, 1500.0) == doctest::Approx(20e-6).epsilon(1e-12));
    // 3-4-5 triangle: point (3, 4) mm seen from an element at the origin
    CHECK(rx_delay(3e-3, 4e-3, 0.0, 1000.0) == doctest::Approx(5e-6).epsilon(1e-12));
    // mirror symmetry in x is exact
    CHECK(rx_delay(2.5e-3, 17e-3, 4.2e-3, 1540.0) ==
          rx_delay(-2.5e-3, 17e-3, -4.2e-3, 1540.0));
}

TEST_CASE("all-zero channel data beamforms to an all-zero image") {
    ProbeGeometry probe(8, 0.3e-3, 5e6);
    std::vector<float> zeros(static_cast<size_t>(1) * 8 * 64, 0.0f);
    RFChannelData rf(1, 8, 64, 40e6, 0.0, probe, {centered_vs(probe, -5e-3)},
                     std::move(zeros));
    BeamformConfig cfg;
    cfg.grid = ImageGrid(5, 7, -1e-3, 1e-3, 1e-3, 2e-3);
    RFImage img = das_beamform(rf, 0, 1500.0, cfg);
    CHECK(img.grid == cfg.grid);
    CHECK(img.beamform_sos == 1500.0);
    CHECK(img.tx_index == 0);
    for (float v : img.values) CHECK(v == 0.0f);
}

TEST_CASE("taps outside the record contribute zero") {
    // constant traces of 40 samples at 40 MHz only reach echoes within ~1 us;
    // near-face pixels sum one tap of 1.0 per element, deep pixels none
    ProbeGeometry probe(4, 0.3e-3, 5e6);
    std::vector<float> ones(static_cast<size_t>(1) * 4 * 40, 1.0f);
    RFChannelData rf(1, 4, 40, 40e6, 0.0, probe, {centered_vs(probe, -5e-3)},
                     std::move(ones));
    BeamformConfig cfg;
    cfg.grid = ImageGrid(3, 4, -0.2e-3, 0.2e-3, 0.1e-3, 0.4e-3);
    for (auto interp : {Interpolation::Linear, Interpolation::Nearest}) {
        cfg.interpolation = interp;
        RFImage shallow = das_beamform(rf, 0, 1500.0, cfg);
        for (float v : shallow.values) CHECK(v == 4.0f);
    }
    cfg.grid = ImageGrid(3, 4, -0.2e-3, 0.2e-3, 30e-3, 40e-3);
    RFImage deep = das_beamform(rf, 0, 1500.0, cfg);
    for (float v : deep.values) CHECK(v == 0.0f);
}

TEST_CASE("single scatterer focuses at its true position") {
    RFChannelData rf = single_scatterer_data(0.0, 20e-3, 1500.0);
    BeamformConfig cfg;
    cfg.grid = ImageGrid(33, 241, -4e-3, 4e-3, 17e-3, 23e-3);

    EnvelopeImage env_true = envelope(das_beamform(rf, 0, 1500.0, cfg));
    auto [px, pz] = envelope_peak_position(env_true);
    CHECK(std::abs(px - 0.0) <= cfg.grid.dx() * 1.001);
    CHECK(std::abs(pz - 20e-3) <= cfg.grid.dz() * 1.001);

    // beamforming too fast maps the echo deeper and defocuses it
    EnvelopeImage env_fast = envelope(das_beamform(rf, 0, 1550.0, cfg));
    auto [qx, qz] = envelope_peak_position(env_fast);
    CHECK(qz > pz);
    CHECK(envelope_peak_value(env_fast) < envelope_peak_value(env_true));
}

TEST_CASE("beamforming is linear in the channel data") {
    RFChannelData rf = random_channel_data(1, 16, 256, 10e6, 1234);
    RFChannelData rf2 = rf;
    for (auto& s : rf2.samples) s *= 2.0f;
    BeamformConfig cfg;
    cfg.grid = ImageGrid(9, 33, -2e-3, 2e-3, 5e-3, 12e-3);
    RFImage a = das_beamform(rf, 0, 1500.0, cfg);
    RFImage b = das_beamform(rf2, 0, 1500.0, cfg);
    // scaling by two is exact in floating point
    for (size_t i = 0; i < a.values.size(); ++i)
        CHECK(b.values[i] == 2.0f * a.values[i]);
}

TEST_CASE("axial translation moves the peak by the same amount") {
    BeamformConfig cfg;
    cfg.grid = ImageGrid(17, 321, -2e-3, 2e-3, 18e-3, 26e-3);
    RFChannelData rf_a = single_scatterer_data(0.0, 20e-3, 1500.0);
    RFChannelData rf_b = single_scatterer_data(0.0, 21e-3, 1500.0);
    auto [ax, az] = envelope_peak_position(envelope(das_beamform(rf_a, 0, 1500.0, cfg)));
    auto [bx, bz] = envelope_peak_position(envelope(das_beamform(rf_b, 0, 1500.0, cfg)));
    CHECK(std::abs((bz - az) - 1e-3) <= cfg.grid.dz() * 1.001);
    CHECK(std::abs(bx - ax) <= cfg.grid.dx() * 1.001);
}

TEST_CASE("sweep equals individual beamforming bit for bit") {
    RFChannelData rf = random_channel_data(2, 8, 200, 10e6, 99);
    BeamformConfig cfg;
    cfg.grid = ImageGrid(7, 21, -1e-3, 1e-3, 4e-3, 9e-3);
    SosSearchSpec spec{1500.0, 1501.0, 0.5};
    BeamformSweep sweep = beamform_sweep(rf, {0, 1}, spec, cfg);
    REQUIRE(sweep.candidates.size() == 3);
    CHECK(sweep.candidates[1] == 1500.5);
    REQUIRE(sweep.images.size() == 6);
    for (int ci = 0; ci < 3; ++ci) {
        for (int ti = 0; ti < 2; ++ti) {
            RFImage one = das_beamform(rf, ti, sweep.candidates[ci], cfg);
            const RFImage& got = sweep.at(ti, ci);
            CHECK(got.tx_index == ti);
            CHECK(got.beamform_sos == sweep.candidates[ci]);
            REQUIRE(got.values.size() == one.values.size());
            for (size_t i = 0; i < one.values.size(); ++i)
                CHECK(got.values[i] == one.values[i]);
        }
    }
}

TEST_CASE("distance memoization does not change results") {
    RFChannelData rf = random_channel_data(1, 16, 256, 10e6, 5);
    BeamformConfig cfg;
    cfg.grid = ImageGrid(9, 33, -2e-3, 2e-3, 5e-3, 12e-3);
    DasWorkspace memoized(rf, cfg);
    REQUIRE(memoized.distances_memoized());
    cfg.distance_table_budget_bytes = 0;
    DasWorkspace inline_path(rf, cfg);
    REQUIRE(!inline_path.distances_memoized());
    RFImage a = memoized.beamform(0, 1500.0);
    RFImage b = inline_path.beamform(0, 1500.0);
    for (size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("beamforming is independent of the thread count") {
    RFChannelData rf = random_channel_data(1, 8, 200, 10e6, 17);
    BeamformConfig cfg;
    cfg.grid = ImageGrid(16, 64, -2e-3, 2e-3, 4e-3, 10e-3);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    RFImage serial = das_beamform(rf, 0, 1500.0, cfg);
    omp_set_num_threads(3);
    RFImage parallel = das_beamform(rf, 0, 1500.0, cfg);
    omp_set_num_threads(saved);
    for (size_t i = 0; i < serial.values.size(); ++i)
        CHECK(serial.values[i] == parallel.values[i]);
}

TEST_CASE("matches the double precision reference beamformer") {
    RFChannelData rf = random_channel_data(1, 16, 256, 10e6, 321);
    BeamformConfig cfg;
    cfg.grid = ImageGrid(9, 33, -2e-3, 2e-3, 5e-3, 12e-3);
    RFImage fast = das_beamform(rf, 0, 1540.0, cfg);
    RFImage ref = reference::das_beamform(rf, 0, 1540.0, cfg);
    float peak = 0.0f;
    for (float v : ref.values) peak = std::max(peak, std::abs(v));
    REQUIRE(peak > 0.0f);
    for (size_t i = 0; i < ref.values.size(); ++i)
        CHECK(std::abs(fast.values[i] - ref.values[i]) <= 1e-3 * peak);
}

TEST_CASE("nearest interpolation agrees with linear on smooth data") {
    RFChannelData rf = single_scatterer_data(0.0, 20e-3, 1500.0);
    BeamformConfig cfg;
    cfg.grid = ImageGrid(17, 161, -2e-3, 2e-3, 19e-3, 21e-3);
    RFImage lin = das_beamform(rf, 0, 1500.0, cfg);
    cfg.interpolation = Interpolation::Nearest;
    RFImage near = das_beamform(rf, 0, 1500.0, cfg);
    const float peak_lin = envelope_peak_value(envelope(lin));
    const float peak_near = envelope_peak_value(envelope(near));
    CHECK(peak_near == doctest::Approx(peak_lin).epsilon(0.05));
}

TEST_CASE("peak amplitude over a sweep is maximized at the true SoS") {
    // the defocus dome of a single transmit is shallow near the truth, so
    // sample finely in time and depth to keep interpolation wobble below it
    RFChannelData rf = single_scatterer_data(0.0, 20e-3, 1500.0, 160e6);
    BeamformConfig cfg;
    cfg.grid = ImageGrid(9, 801, -1e-3, 1e-3, 18e-3, 22e-3);
    SosSearchSpec spec{1490.0, 1510.0, 0.5};
    DasWorkspace ws(rf, cfg);
    double best_s = 0.0;
    float best_v = -1.0f;
    for (double s : spec.candidates()) {
        const float v = envelope_peak_value(envelope(ws.beamform(0, s)));
        if (v > best_v) {
            best_v = v;
            best_s = s;
        }
    }
    CHECK(std::abs(best_s - 1500.0) <= 2.0 * spec.step + 1e-9);
}

TEST_CASE("cached images round-trip bit for bit") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "soscal_beamform_cache_test";
    fs::remove_all(dir);

    RFChannelData rf = random_channel_data(1, 8, 200, 10e6, 42);
    BeamformConfig cfg;
    cfg.grid = ImageGrid(7, 21, -1e-3, 1e-3, 4e-3, 9e-3);
    RFImage plain = das_beamform(rf, 0, 1500.0, cfg);

    cfg.cache_dir = dir.string();
    RFImage first = das_beamform(rf, 0, 1500.0, cfg);
    size_t entries = 0;
    for ([[maybe_unused]] auto& p : fs::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);

    // a second workspace hits the cache and returns the identical image
    RFImage second = das_beamform(rf, 0, 1500.0, cfg);
    for (size_t i = 0; i < plain.values.size(); ++i) {
        CHECK(first.values[i] == plain.values[i]);
        CHECK(second.values[i] == plain.values[i]);
    }

    // a damaged entry is recomputed, not trusted
    for (auto& p : fs::directory_iterator(dir))
        fs::resize_file(p.path(), 8);
    RFImage repaired = das_beamform(rf, 0, 1500.0, cfg);
    for (size_t i = 0; i < plain.values.size(); ++i)
        CHECK(repaired.values[i] == plain.values[i]);

    fs::remove_all(dir);
}

TEST_CASE("invalid beamforming arguments are rejected") {
    RFChannelData rf = random_channel_data(1, 4, 64, 10e6, 1);
    BeamformConfig cfg;
    cfg.grid = ImageGrid(3, 3, -1e-3, 1e-3, 1e-3, 2e-3);
    CHECK_THROWS_AS(das_beamform(rf, -1, 1500.0, cfg), ConfigError);
    CHECK_THROWS_AS(das_beamform(rf, 1, 1500.0, cfg), ConfigError);
    CHECK_THROWS_AS(das_beamform(rf, 0, 0.0, cfg), ConfigError);
    CHECK_THROWS_AS(das_beamform(rf, 0, -1540.0, cfg), ConfigError);
    CHECK_THROWS_AS(das_beamform(rf, 0, std::nan(""), cfg), ConfigError);
    CHECK_THROWS_AS(beamform_sweep(rf, {}, SosSearchSpec{1400.0, 1500.0, 1.0}, cfg),
                    ConfigError);
}
