#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "soscal/container.hpp"

using namespace soscal;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

RFChannelData make_random_rf(uint64_t seed) {
    ProbeGeometry probe(4, 300e-6, 5e6);
    std::vector<TxEvent> events{{-1.8e-3, -9e-3, 1, 3}, {1.8e-3, -9e-3, 2, 3}};
    std::mt19937_64 rng(seed);
    std::vector<float> samples(2 * 4 * 16);
    for (auto& s : samples)
        s = static_cast<float>(static_cast<int64_t>(rng() >> 40) - (1 << 23)) / (1 << 20);
    return RFChannelData(2, 4, 16, 40e6, 2.5e-7, probe, events, samples);
}

}  // namespace

TEST_CASE("rf container round trip is bit identical") {
    const std::string path = temp_path("soscal_rf_roundtrip.rfc");
    for (uint64_t seed : {1u, 2u, 3u}) {
        RFChannelData rf = make_random_rf(seed);
        write_rf_container(path, rf, 1540.0);
        LoadedRf back = read_rf_container(path);

        CHECK(back.data.n_tx == rf.n_tx);
        CHECK(back.data.n_elements == rf.n_elements);
        CHECK(back.data.n_samples == rf.n_samples);
        CHECK(back.data.sampling_frequency == rf.sampling_frequency);
        CHECK(back.data.t0 == rf.t0);
        CHECK(back.data.probe.pitch == rf.probe.pitch);
        CHECK(back.data.tx_events.size() == rf.tx_events.size());
        CHECK(back.data.tx_events[0].vs_x == rf.tx_events[0].vs_x);
        CHECK(back.data.tx_events[1].aperture_center_element == 2);
        REQUIRE(back.true_sos.has_value());
        CHECK(*back.true_sos == 1540.0);
        // payload must round trip exactly, bit for bit
        REQUIRE(back.data.samples.size() == rf.samples.size());
        CHECK(std::memcmp(back.data.samples.data(), rf.samples.data(),
                          rf.samples.size() * sizeof(float)) == 0);
    }
    std::remove(path.c_str());
}

TEST_CASE("rf container without ground truth") {
    const std::string path = temp_path("soscal_rf_nogt.rfc");
    write_rf_container(path, make_random_rf(7));
    CHECK_FALSE(read_rf_container(path).true_sos.has_value());
    std::remove(path.c_str());
}

TEST_CASE("image containers round trip bit identically") {
    ImageGrid g(3, 5, -1e-3, 1e-3, 8e-3, 12e-3);
    std::mt19937_64 rng(11);
    std::vector<float> vals(15);
    for (auto& v : vals)
        v = static_cast<float>(static_cast<int64_t>(rng() >> 40) - (1 << 23)) / (1 << 22);

    const std::string rf_path = temp_path("soscal_img.rfc");
    RFImage rf(g, 1512.5, 1, vals);
    write_rf_image(rf_path, rf);
    RFImage rf_back = read_rf_image(rf_path);
    CHECK(rf_back.grid == g);
    CHECK(rf_back.beamform_sos == 1512.5);
    CHECK(rf_back.tx_index == 1);
    CHECK(std::memcmp(rf_back.values.data(), vals.data(), vals.size() * 4) == 0);

    std::vector<float> env_vals = vals;
    for (auto& v : env_vals) v = std::abs(v);
    const std::string env_path = temp_path("soscal_env.rfc");
    write_envelope_image(env_path, EnvelopeImage(g, 1500.0, env_vals));
    EnvelopeImage env_back = read_envelope_image(env_path);
    CHECK(std::memcmp(env_back.values.data(), env_vals.data(), env_vals.size() * 4) == 0);

    std::vector<float> db_vals = vals;
    for (auto& v : db_vals) v = -std::abs(v) * 10.0f;
    const std::string bm_path = temp_path("soscal_bm.rfc");
    write_bmode_image(bm_path, BModeImage(g, 1500.0, 60.0, db_vals));
    BModeImage bm_back = read_bmode_image(bm_path);
    CHECK(bm_back.dynamic_range == 60.0);
    CHECK(std::memcmp(bm_back.values.data(), db_vals.data(), db_vals.size() * 4) == 0);

    std::remove(rf_path.c_str());
    std::remove(env_path.c_str());
    std::remove(bm_path.c_str());
}

TEST_CASE("reader rejects mismatched kinds and corrupt files") {
    ImageGrid g(2, 2, -1e-3, 1e-3, 8e-3, 9e-3);
    const std::string path = temp_path("soscal_kind.rfc");
    write_rf_image(path, RFImage(g, 1500.0, 0, std::vector<float>(4, 0.0f)));
    CHECK_THROWS_AS(read_bmode_image(path), IoError);
    CHECK_THROWS_AS(read_rf_container(path), IoError);

    // truncate the payload
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 4);
    CHECK_THROWS_AS(read_rf_image(path), IoError);

    CHECK_THROWS_AS(read_rf_container(temp_path("soscal_does_not_exist.rfc")),
                    IoError);
    std::remove(path.c_str());
}

TEST_CASE("pgm export writes a valid binary header") {
    ImageGrid g(4, 3, -1e-3, 1e-3, 8e-3, 10e-3);
    std::vector<float> vals(12);
    for (size_t i = 0; i < vals.size(); ++i)
        vals[i] = -static_cast<float>(i) * 5.0f;
    const std::string path = temp_path("soscal_test.pgm");
    write_pgm(path, BModeImage(g, 1500.0, 60.0, vals));

    std::ifstream in(path, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    CHECK(magic == "P5");
    CHECK(w == 4);
    CHECK(h == 3);
    CHECK(maxval == 255);
    in.get();  // single whitespace after maxval
    std::vector<char> data(12);
    in.read(data.data(), 12);
    CHECK(in.gcount() == 12);
    // value 0 dB maps to 255
    CHECK(static_cast<uint8_t>(data[0]) == 255);
    std::remove(path.c_str());
}
