#pragma once

#include <complex>

// Thin wrapper around FFTW's complex double-precision transforms. Plans are
// created with FFTW_ESTIMATE (deterministic plan choice, no runtime tuning)
// and cached per shape under a global lock; execution runs on caller buffers
// and is safe to call from multiple threads concurrently.

namespace soscal::fftutil {

// Smallest power of two >= n (n >= 1).
int next_pow2(int n);

// In-place 1-D transform of n complex values. The inverse is normalized by
// 1/n, so fft_1d(fft_1d(x, false), true) returns x.
void fft_1d(std::complex<double>* data, int n, bool inverse);

// In-place 2-D transform of row-major [n0][n1] complex values. Inverse is
// normalized by 1/(n0*n1).
void fft_2d(std::complex<double>* data, int n0, int n1, bool inverse);

}  // namespace soscal::fftutil
