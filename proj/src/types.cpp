#include "soscal/types.hpp"

#include <cmath>

namespace soscal {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void require_finite_values(const std::vector<float>& v, const char* what) {
    for (size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]))
            throw ConfigError(std::string(what) + ": non-finite value at index " +
                              std::to_string(i));
    }
}

}  // namespace

ProbeGeometry::ProbeGeometry(int element_count_, double pitch_,
                             double center_frequency_)
    : element_count(element_count_),
      pitch(pitch_),
      center_frequency(center_frequency_) {
    require(element_count >= 2, "probe: element_count must be >= 2");
    require(std::isfinite(pitch) && pitch > 0.0, "probe: pitch must be > 0");
    require(std::isfinite(center_frequency) && center_frequency > 0.0,
            "probe: center_frequency must be > 0");
}

std::vector<double> ProbeGeometry::element_positions() const {
    std::vector<double> xs(element_count);
    for (int i = 0; i < element_count; ++i) xs[i] = element_x(i);
    return xs;
}

void validate_tx_event(const TxEvent& ev, const ProbeGeometry& probe) {
    require(std::isfinite(ev.vs_x) && std::isfinite(ev.vs_z),
            "tx event: virtual source position must be finite");
    require(ev.vs_z < 0.0, "tx event: virtual source must sit behind the array (vs_z < 0)");
    require(ev.aperture_size >= 1, "tx event: aperture_size must be >= 1");
    require(ev.aperture_center_element >= 0 &&
                ev.aperture_center_element < probe.element_count,
            "tx event: aperture_center_element out of range");
    const int half = ev.aperture_size / 2;
    require(ev.aperture_center_element - half >= 0 &&
                ev.aperture_center_element + half < probe.element_count,
            "tx event: aperture does not fit on the array");
}

RFChannelData::RFChannelData(int n_tx_, int n_elements_, int n_samples_,
                             double sampling_frequency_, double t0_,
                             ProbeGeometry probe_, std::vector<TxEvent> tx_events_,
                             std::vector<float> samples_)
    : n_tx(n_tx_),
      n_elements(n_elements_),
      n_samples(n_samples_),
      sampling_frequency(sampling_frequency_),
      t0(t0_),
      probe(std::move(probe_)),
      tx_events(std::move(tx_events_)),
      samples(std::move(samples_)) {
    require(n_tx >= 1, "rf data: n_tx must be >= 1");
    require(n_elements == probe.element_count,
            "rf data: n_elements must match the probe");
    require(n_samples >= 1, "rf data: n_samples must be >= 1");
    require(std::isfinite(sampling_frequency) && sampling_frequency > 0.0,
            "rf data: sampling_frequency must be > 0");
    require(std::isfinite(t0), "rf data: t0 must be finite");
    require(tx_events.size() == static_cast<size_t>(n_tx),
            "rf data: tx_events length must equal n_tx");
    for (const TxEvent& ev : tx_events) validate_tx_event(ev, probe);
    require(samples.size() == static_cast<size_t>(n_tx) * n_elements * n_samples,
            "rf data: sample buffer size mismatch");
    require_finite_values(samples, "rf data");
}

ImageGrid::ImageGrid(int n_x_, int n_z_, double x_min_, double x_max_,
                     double z_min_, double z_max_)
    : n_x(n_x_), n_z(n_z_), x_min(x_min_), x_max(x_max_), z_min(z_min_),
      z_max(z_max_) {
    require(n_x >= 1 && n_z >= 1, "grid: pixel counts must be >= 1");
    require(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(z_min) &&
                std::isfinite(z_max),
            "grid: extents must be finite");
    require(x_min <= x_max && z_min <= z_max, "grid: extents must be ordered");
    require(n_x == 1 || x_min < x_max,
            "grid: n_x > 1 needs a non-degenerate lateral extent");
    require(n_z == 1 || z_min < z_max,
            "grid: n_z > 1 needs a non-degenerate axial extent");
}

std::vector<std::pair<double, double>> pixel_positions(const ImageGrid& grid) {
    std::vector<std::pair<double, double>> pos;
    pos.reserve(grid.pixel_count());
    for (int ix = 0; ix < grid.n_x; ++ix) {
        const double x = grid.x(ix);
        for (int iz = 0; iz < grid.n_z; ++iz) pos.emplace_back(x, grid.z(iz));
    }
    return pos;
}

RFImage::RFImage(ImageGrid grid_, double beamform_sos_, int tx_index_,
                 std::vector<float> values_)
    : grid(grid_), beamform_sos(beamform_sos_), tx_index(tx_index_),
      values(std::move(values_)) {
    require(std::isfinite(beamform_sos) && beamform_sos > 0.0,
            "rf image: beamform_sos must be > 0");
    require(tx_index >= kCompoundedTx, "rf image: bad tx_index");
    require(values.size() == grid.pixel_count(), "rf image: value count mismatch");
    require_finite_values(values, "rf image");
}

EnvelopeImage::EnvelopeImage(ImageGrid grid_, double beamform_sos_,
                             std::vector<float> values_)
    : grid(grid_), beamform_sos(beamform_sos_), values(std::move(values_)) {
    require(std::isfinite(beamform_sos) && beamform_sos > 0.0,
            "envelope image: beamform_sos must be > 0");
    require(values.size() == grid.pixel_count(),
            "envelope image: value count mismatch");
    for (size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0f)
            throw ConfigError("envelope image: values must be finite and >= 0");
    }
}

BModeImage::BModeImage(ImageGrid grid_, double beamform_sos_,
                       double dynamic_range_, std::vector<float> values_)
    : grid(grid_), beamform_sos(beamform_sos_), dynamic_range(dynamic_range_),
      values(std::move(values_)) {
    require(std::isfinite(beamform_sos) && beamform_sos > 0.0,
            "bmode image: beamform_sos must be > 0");
    require(std::isfinite(dynamic_range) && dynamic_range > 0.0,
            "bmode image: dynamic_range must be > 0");
    require(values.size() == grid.pixel_count(), "bmode image: value count mismatch");
    const float lo = static_cast<float>(-dynamic_range);
    for (size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= lo && values[i] <= 0.0f))
            throw ConfigError("bmode image: values must lie in [-dynamic_range, 0]");
    }
}

SosSearchSpec::SosSearchSpec(double s_min_, double s_max_, double step_)
    : s_min(s_min_), s_max(s_max_), step(step_) {
    require(std::isfinite(s_min) && std::isfinite(s_max) && std::isfinite(step),
            "search spec: values must be finite");
    require(s_min > 0.0, "search spec: s_min must be > 0");
    require(step > 0.0, "search spec: step must be > 0");
    require(s_min < s_max, "search spec: s_min must be < s_max");
    require(candidate_count() >= 2, "search spec: needs at least two candidates");
}

int SosSearchSpec::candidate_count() const {
    // Tolerate the last candidate landing a hair past s_max from rounding.
    const double steps = (s_max - s_min) / step;
    return static_cast<int>(std::floor(steps + 1e-9)) + 1;
}

std::vector<double> SosSearchSpec::candidates() const {
    const int n = candidate_count();
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i) c[i] = s_min + i * step;
    return c;
}

}  // namespace soscal
