#pragma once

#include <vector>

#include "soscal/beamform.hpp"
#include "soscal/sim.hpp"
#include "soscal/types.hpp"

// Plain serial implementations of the hot kernels, written for clarity and
// kept as the trusted baseline: unit tests cross-check the OpenMP production
// kernels against these, and the benchmark tool compares their throughput.
// They favor double precision and textbook formulas over speed, so run them
// on small inputs only.

namespace soscal::reference {

// Analytic-signal envelope computed with a naive O(n^2) DFT on the same
// padded length the production kernel uses.
EnvelopeImage envelope(const RFImage& img);

// Delay-and-sum with all delay and interpolation arithmetic in double
// precision, one pixel at a time.
RFImage das_beamform(const RFChannelData& rf, int tx_index, double sos,
                     const BeamformConfig& cfg);

// Scatterer echoes synthesized by evaluating the pulse directly at every
// sample instant instead of the incremental recurrences.
RFChannelData simulate_channel_data(const ScattererField& field,
                                    const ProbeGeometry& probe,
                                    const std::vector<TxEvent>& tx_events,
                                    const SimConfig& cfg);

}  // namespace soscal::reference
