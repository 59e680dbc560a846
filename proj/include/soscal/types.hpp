#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Core data model shared by the simulator, beamformer, imaging chain and
// estimator. Conventions:
//   - x is lateral, centered on the array (x = 0 at the array center),
//   - z is axial, z = 0 at the array face and increasing with depth,
//   - images are stored lateral-major: values[ix * n_z + iz], so the axial
//     samples of one lateral line are contiguous.
// All distances are meters, times are seconds, speeds are m/s.

namespace soscal {

// Error taxonomy. The CLI maps these onto process exit codes, library users
// can catch them individually.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration or argument values (exit code 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Metric/frame-count mismatches (exit code 3).
class ArityError : public Error {
public:
    explicit ArityError(const std::string& msg) : Error(msg) {}
};

// File and serialization failures (exit code 4).
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Degenerate results such as an all-tie sweep (exit code 5 under --strict).
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& msg) : Error(msg) {}
};

// Linear array transducer. Element centers are placed symmetrically around
// x = 0 at z = 0.
struct ProbeGeometry {
    int element_count = 0;
    double pitch = 0.0;             // element center spacing [m]
    double center_frequency = 0.0;  // nominal pulse frequency [Hz]

    ProbeGeometry(int element_count_, double pitch_, double center_frequency_);

    // x position of element i, i in [0, element_count)
    double element_x(int i) const {
        return (static_cast<double>(i) - 0.5 * (element_count - 1)) * pitch;
    }

    std::vector<double> element_positions() const;
};

// One diverging-wave transmit described by its virtual source. The virtual
// source sits behind the array (vs_z < 0); the aperture fields record which
// contiguous element block was driven.
struct TxEvent {
    double vs_x = 0.0;                 // virtual source lateral position [m]
    double vs_z = 0.0;                 // virtual source axial position [m], < 0
    int aperture_center_element = 0;   // element index nearest the VS
    int aperture_size = 0;             // driven element count, odd
};

void validate_tx_event(const TxEvent& ev, const ProbeGeometry& probe);

// Raw per-channel acquisition: n_tx transmit events, each recorded on all
// n_elements channels with n_samples samples at sampling_frequency. Sample k
// of a trace corresponds to time t0 + k / sampling_frequency.
struct RFChannelData {
    int n_tx = 0;
    int n_elements = 0;
    int n_samples = 0;
    double sampling_frequency = 0.0;  // [Hz]
    double t0 = 0.0;                  // time of sample 0 [s]
    ProbeGeometry probe;
    std::vector<TxEvent> tx_events;
    std::vector<float> samples;  // [tx][element][sample], sample fastest

    RFChannelData(int n_tx_, int n_elements_, int n_samples_,
                  double sampling_frequency_, double t0_, ProbeGeometry probe_,
                  std::vector<TxEvent> tx_events_, std::vector<float> samples_);

    size_t trace_offset(int tx, int element) const {
        return (static_cast<size_t>(tx) * n_elements + element) * n_samples;
    }
    const float* trace(int tx, int element) const {
        return samples.data() + trace_offset(tx, element);
    }
    float at(int tx, int element, int sample) const {
        return samples[trace_offset(tx, element) + sample];
    }
};

// Rectangular pixel grid. Pixel centers span the extents inclusively: with
// n > 1 the first center sits on the min extent and the last on the max, so
// spacing is (max - min) / (n - 1). A single-pixel axis sits on its min.
struct ImageGrid {
    int n_x = 0;
    int n_z = 0;
    double x_min = 0.0, x_max = 0.0;  // lateral extent [m]
    double z_min = 0.0, z_max = 0.0;  // axial extent [m]

    ImageGrid() = default;
    ImageGrid(int n_x_, int n_z_, double x_min_, double x_max_, double z_min_,
              double z_max_);

    double dx() const { return n_x > 1 ? (x_max - x_min) / (n_x - 1) : 0.0; }
    double dz() const { return n_z > 1 ? (z_max - z_min) / (n_z - 1) : 0.0; }
    double x(int ix) const {
        return n_x > 1 ? x_min + ix * (x_max - x_min) / (n_x - 1) : x_min;
    }
    double z(int iz) const {
        return n_z > 1 ? z_min + iz * (z_max - z_min) / (n_z - 1) : z_min;
    }
    size_t pixel_count() const {
        return static_cast<size_t>(n_x) * static_cast<size_t>(n_z);
    }
    bool operator==(const ImageGrid& o) const {
        return n_x == o.n_x && n_z == o.n_z && x_min == o.x_min &&
               x_max == o.x_max && z_min == o.z_min && z_max == o.z_max;
    }
};

// Pixel centers in storage order (lateral-major: all axial samples of lateral
// line 0, then line 1, ...). Returned as (x, z) pairs.
std::vector<std::pair<double, double>> pixel_positions(const ImageGrid& grid);

// Beamformed image before envelope detection. tx_index records the transmit
// event it came from; kCompoundedTx marks an average over several events.
inline constexpr int kCompoundedTx = -1;

struct RFImage {
    ImageGrid grid;
    double beamform_sos = 0.0;  // SoS the delays were computed with [m/s]
    int tx_index = 0;
    std::vector<float> values;  // lateral-major

    RFImage() = default;
    RFImage(ImageGrid grid_, double beamform_sos_, int tx_index_,
            std::vector<float> values_);

    float value(int ix, int iz) const {
        return values[static_cast<size_t>(ix) * grid.n_z + iz];
    }
};

// Detected envelope, non-negative.
struct EnvelopeImage {
    ImageGrid grid;
    double beamform_sos = 0.0;
    std::vector<float> values;

    EnvelopeImage() = default;
    EnvelopeImage(ImageGrid grid_, double beamform_sos_,
                  std::vector<float> values_);

    float value(int ix, int iz) const {
        return values[static_cast<size_t>(ix) * grid.n_z + iz];
    }
};

// Log-compressed image in dB relative to the image maximum; values lie in
// [-dynamic_range, 0].
struct BModeImage {
    ImageGrid grid;
    double beamform_sos = 0.0;
    double dynamic_range = 0.0;  // [dB], > 0
    std::vector<float> values;

    BModeImage() = default;
    BModeImage(ImageGrid grid_, double beamform_sos_, double dynamic_range_,
               std::vector<float> values_);

    float value(int ix, int iz) const {
        return values[static_cast<size_t>(ix) * grid.n_z + iz];
    }
};

// Uniform grid of candidate speed-of-sound values [s_min, s_max] with the
// given step. Must contain at least two candidates.
struct SosSearchSpec {
    double s_min = 0.0;
    double s_max = 0.0;
    double step = 0.0;

    SosSearchSpec(double s_min_, double s_max_, double step_);

    int candidate_count() const;
    std::vector<double> candidates() const;
    double span() const { return s_max - s_min; }
};

}  // namespace soscal
