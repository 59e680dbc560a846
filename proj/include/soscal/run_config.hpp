#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "soscal/beamform.hpp"
#include "soscal/estimator.hpp"
#include "soscal/sim.hpp"

// Declarative experiment description parsed from JSON. The schema is strict:
// unknown keys and wrong value types are rejected before any compute, and
// every field has a default mirroring the standard acquisition (128-element
// 0.3 mm probe at 5 MHz, 17 virtual sources 9 mm behind the array, innermost
// pair 3.6 mm apart).

namespace soscal {

ProbeGeometry default_probe();

// Symmetric virtual-source fan; count 1 collapses to the centered source.
struct TxSequenceConfig {
    int count = 17;
    double vs_spacing = 1.8e-3;  // [m]
    double vs_z = -9e-3;         // [m]
    int aperture_size = 31;
};

std::vector<TxEvent> make_tx_events(const ProbeGeometry& probe,
                                    const TxSequenceConfig& tx);

struct RunConfig {
    SimConfig sim;
    ProbeGeometry probe = default_probe();
    TxSequenceConfig tx;
    uint64_t seed = 1;

    std::optional<std::string> input_rf;
    TxSelection inputs = TxSelection::Dual;
    std::vector<MetricId> metrics;
    std::optional<SosSearchSpec> search;
    BeamformConfig beamform;
    PatchSpec patch;

    std::optional<std::string> out_rf;
    std::optional<std::string> out_csv;
    std::optional<std::string> out_json;
    std::optional<std::string> out_pgm;
};

// Parses and validates a config document; messages name the offending key.
RunConfig parse_run_config(const std::string& json_text);

// Reads the file, then parses it. Unreadable files raise IoError.
RunConfig load_run_config(const std::string& path);

}  // namespace soscal
