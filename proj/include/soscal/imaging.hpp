#pragma once

#include <vector>

#include "soscal/types.hpp"

// Post-beamforming image chain: envelope detection, log compression and
// coherent compounding.

namespace soscal {

inline constexpr double kDefaultDynamicRange = 60.0;  // [dB]

// Envelope detection along each lateral line via the analytic signal: the
// line is zero-padded to the next power of two (even length), transformed,
// negative frequencies are zeroed (DC and Nyquist kept, positive frequencies
// doubled), and the magnitude of the inverse transform is taken. Requires
// n_z >= 4.
EnvelopeImage envelope(const RFImage& img);

// 20*log10(v / max) clipped to [-dynamic_range, 0]. An all-zero envelope maps
// to a uniform -dynamic_range image.
BModeImage log_compress(const EnvelopeImage& img,
                        double dynamic_range = kDefaultDynamicRange);

// Coherent (pre-envelope) mean of RF images on the same grid beamformed at
// the same SoS. A single frame passes through unchanged; multi-frame results
// are tagged kCompoundedTx.
RFImage compound(const std::vector<RFImage>& frames);

// Rows [row_begin, row_end) of every lateral line as a standalone image; the
// axial extent shrinks to the sliced pixel centers. Used for layered
// estimation, values are copied unchanged.
RFImage slice_rows(const RFImage& img, int row_begin, int row_end);
BModeImage slice_rows(const BModeImage& img, int row_begin, int row_end);

}  // namespace soscal
