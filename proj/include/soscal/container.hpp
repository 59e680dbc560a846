#pragma once

#include <optional>
#include <string>

#include "soscal/types.hpp"

// On-disk container: a single-line JSON header terminated by '\n', followed by
// the raw sample payload as little-endian IEEE-754 float32 in storage order.
// The header carries {"magic":"SOSCAL","version":1,"kind":...,"dtype":"f32le",
// "shape":[...]} plus the semantic fields of the stored type. Round trips are
// bit-identical: the payload bytes are copied verbatim and header numbers are
// serialized with shortest round-trip formatting.
//
// Kinds:
//   "rf_channel_data"  shape [n_tx, n_elements, n_samples]
//   "rf_image"         shape [n_x, n_z], lateral-major payload
//   "envelope_image"   shape [n_x, n_z]
//   "bmode_image"      shape [n_x, n_z]

namespace soscal {

struct LoadedRf {
    RFChannelData data;
    // Ground-truth SoS carried through from the simulator, when known.
    std::optional<double> true_sos;
};

void write_rf_container(const std::string& path, const RFChannelData& rf,
                        std::optional<double> true_sos = std::nullopt);
LoadedRf read_rf_container(const std::string& path);

void write_rf_image(const std::string& path, const RFImage& img);
RFImage read_rf_image(const std::string& path);

void write_envelope_image(const std::string& path, const EnvelopeImage& img);
EnvelopeImage read_envelope_image(const std::string& path);

void write_bmode_image(const std::string& path, const BModeImage& img);
BModeImage read_bmode_image(const std::string& path);

// 8-bit binary PGM (P5) for quick visual inspection. Rows run along depth,
// columns along the lateral axis. B-mode maps [-dynamic_range, 0] onto
// [0, 255]; the envelope variant is normalized to its maximum.
void write_pgm(const std::string& path, const BModeImage& img);
void write_pgm(const std::string& path, const EnvelopeImage& img);

}  // namespace soscal
