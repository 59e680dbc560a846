#pragma once

#include <string>
#include <utility>
#include <vector>

#include "soscal/types.hpp"

// Eleven scalar image metrics in three arity groups: single-image quality
// metrics evaluated on B-mode images, pairwise comparison metrics evaluated
// on RF images, and the multi-frame coefficient of variation. The evaluate_*
// boundary normalizes sign conventions so that larger is always better; the
// raw ops below keep their textbook signs.

namespace soscal {

enum class MetricId {
    Focus,
    Entropy,
    GradMag,
    Tenengrad,
    STTen,
    SSIM,
    NegMSE,
    PSNR,
    MI,
    Correlation,
    CV,
};

enum class MetricArity { SingleImage, Pair, MultiFrame };

MetricArity metric_arity(MetricId id);

// Stable lowercase identifiers for CLI selection: focus, entropy, gradmag,
// tenengrad, stten, ssim, mse, psnr, mi, corr, cv.
std::string metric_name(MetricId id);
MetricId metric_from_name(const std::string& name);
std::vector<MetricId> all_metrics();

enum class ThresholdMode { Absolute, Percentile };

struct MetricParams {
    // ring of normalized spatial frequencies whose energy fraction the focus
    // metric measures
    double focus_f1 = 0.10;
    double focus_f2 = 0.30;
    int entropy_bins = 256;
    double stten_sigma = 2.0;  // blur std [pixels], kernel truncated at 4 sigma
    ThresholdMode stten_tau_mode = ThresholdMode::Percentile;
    double stten_tau = 90.0;  // percentile in [0, 100) or absolute magnitude
    double ssim_k1 = 0.01;
    double ssim_k2 = 0.03;
    int mi_bins = 20;
};

void validate_metric_params(const MetricParams& params);

// Fraction of 2-D FFT energy inside f1 <= sqrt(fx^2 + fz^2) <= f2, with each
// axis frequency normalized to [-0.5, 0.5). The DC bin (pure brightness) is
// left out of both numerator and denominator. In [0, 1].
double focus(const BModeImage& img, const MetricParams& params);

// Base-2 Shannon entropy of the n_bins histogram over [-dynamic_range, 0].
double entropy(const BModeImage& img, int n_bins);

// Sum of Sobel gradient magnitudes (3x3 kernels, edge-replicated borders).
double grad_mag(const BModeImage& img);

// Sum of squared Sobel gradient magnitudes.
double tenengrad(const BModeImage& img);

// Tenengrad of the Gaussian-blurred image restricted to pixels whose
// gradient magnitude reaches the threshold.
double st_ten(const BModeImage& img, const MetricParams& params);

// Mean two-term SSIM over sliding 7x7 uniform windows; the stabilizing
// constants derive from the joint max - min data range. In [-1, 1].
double ssim(const RFImage& i1, const RFImage& i2, const MetricParams& params);

// Negated mean squared difference, 0 iff identical.
double neg_mse(const RFImage& i1, const RFImage& i2);

// 20 log10(MAX / sqrt(MSE)) with MAX the largest pixel value over both
// images. Identical images yield +infinity, which sweeps treat as maximal.
double psnr(const RFImage& i1, const RFImage& i2);

// Mutual information in nats from a bins^2 joint histogram; each image is
// discretized over its own min-max range. Exactly symmetric in its arguments.
double mutual_information(const RFImage& i1, const RFImage& i2, int bins);

// Pearson correlation over all pixels. Throws DegenerateError when either
// image has zero variance.
double correlation(const RFImage& i1, const RFImage& i2);

// Mean across-frame coefficient of variation: sum over pixels of the
// population standard deviation divided by the mean absolute value, skipping
// pixels whose mean magnitude is below 1e-12 of the global peak. >= 0;
// the evaluate boundary negates it.
double coefficient_of_variation(const std::vector<RFImage>& frames);

// Larger-is-better dispatch; each rejects ids of a different arity.
double evaluate_single(MetricId id, const BModeImage& img, const MetricParams& params);
double evaluate_pair(MetricId id, const RFImage& i1, const RFImage& i2,
                     const MetricParams& params);
double evaluate_multi(MetricId id, const std::vector<RFImage>& frames,
                      const MetricParams& params);

// Grid search over focus bands (f1 in {0.02..0.30}, f2 in {f1+0.02..0.45},
// step 0.02): returns the band whose focus sweep argmax lands closest to
// true_sos, widest band on ties. candidates[i] scores sweep_bmodes[i].
std::pair<double, double> calibrate_focus_band(
    const std::vector<BModeImage>& sweep_bmodes,
    const std::vector<double>& candidates, double true_sos);

}  // namespace soscal
