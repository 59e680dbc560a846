#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soscal/types.hpp"

// Delay-and-sum beamforming of virtual-source diverging-wave acquisitions.
// Every pixel sums all element traces at the round-trip delay
// tx_delay + rx_delay - t0; taps outside the record contribute zero and all
// elements are weighted uniformly.

namespace soscal {

enum class Interpolation { Nearest, Linear };

// Default imaging grid: 256 lateral lines over the 38 mm aperture width,
// 3072 axial samples over z in [8, 40] mm.
ImageGrid default_beamform_grid();

struct BeamformConfig {
    ImageGrid grid = default_beamform_grid();
    Interpolation interpolation = Interpolation::Linear;
    // Receive distances are memoized per (pixel, element) when the table fits
    // this budget; otherwise they are recomputed inline with identical
    // arithmetic, so results do not depend on the budget.
    size_t distance_table_budget_bytes = size_t(256) << 20;
    // When non-empty, beamformed images are cached here as containers keyed
    // by a content hash of the channel data and beamforming parameters.
    std::string cache_dir;
};

// Transmit wavefront delay: time after the diverging VS wave crosses the
// array face on the VS axis, (|p - vs| - |vs_z|) / sos.
double tx_delay(double px, double pz, const TxEvent& ev, double sos);

// Receive path delay from a field point back to an element at (element_x, 0).
double rx_delay(double px, double pz, double element_x, double sos);

RFImage das_beamform(const RFChannelData& rf, int tx_index, double sos,
                     const BeamformConfig& cfg);

// Reusable geometry for repeated beamforming of one acquisition (pixel
// coordinates, per-event transmit distances, memoized receive distances).
// Holds a reference to the channel data; keep the data alive while using it.
class DasWorkspace {
public:
    DasWorkspace(const RFChannelData& rf, const BeamformConfig& cfg);

    RFImage beamform(int tx_index, double sos) const;

    bool distances_memoized() const { return !rx_dist.empty(); }

private:
    const RFChannelData& rf;
    BeamformConfig cfg;
    std::vector<double> px, pz;          // pixel center coordinates
    std::vector<double> ex;              // element x positions
    std::vector<std::vector<float>> tx_dist;  // per event: |p - vs| - |vs_z|, per pixel
    std::vector<float> rx_dist;          // [pixel][element] when memoized
    uint64_t content_key = 0;            // hash of data + geometry for the cache

    RFImage compute(int tx_index, double sos) const;
};

// All (tx, candidate) images of a sweep. Image for tx_indices[ti] at
// candidates[ci] sits at images[ci * tx_indices.size() + ti].
struct BeamformSweep {
    std::vector<int> tx_indices;
    std::vector<double> candidates;
    std::vector<RFImage> images;

    const RFImage& at(int tx_pos, int candidate_pos) const {
        return images[static_cast<size_t>(candidate_pos) * tx_indices.size() + tx_pos];
    }
};

// Identical to calling das_beamform for every (tx, candidate) pair.
BeamformSweep beamform_sweep(const RFChannelData& rf,
                             const std::vector<int>& tx_indices,
                             const SosSearchSpec& spec, const BeamformConfig& cfg);

}  // namespace soscal
