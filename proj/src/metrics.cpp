#include "soscal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

#include "soscal/fft_util.hpp"

namespace soscal {

namespace {

// normalized frequency of DFT index k: k/n mapped into [-0.5, 0.5)
double dft_frequency(int k, int n) {
    return (k <= n / 2 ? k : k - n) / static_cast<double>(n);
}

struct PowerSpectrum {
    int n_x = 0, n_z = 0;
    std::vector<double> power;  // |F|^2, row-major [n_x][n_z]
};

PowerSpectrum power_spectrum(const BModeImage& img) {
    PowerSpectrum ps;
    ps.n_x = img.grid.n_x;
    ps.n_z = img.grid.n_z;
    std::vector<std::complex<double>> buf(img.values.begin(), img.values.end());
    fftutil::fft_2d(buf.data(), ps.n_x, ps.n_z, false);
    ps.power.resize(buf.size());
    for (size_t i = 0; i < buf.size(); ++i) ps.power[i] = std::norm(buf[i]);
    return ps;
}

// Energy fraction of the ring f1 <= |f| <= f2, in raster order so repeated
// evaluations of one spectrum are bitwise reproducible. The DC bin carries
// the image brightness offset, not structure, and B-mode pixels are never
// zero-mean, so DC is excluded from both sums; a spectrum whose remaining
// energy sits at the transform's noise floor scores 0.
double band_energy_ratio(const PowerSpectrum& ps, double f1, double f2) {
    double total = 0.0, band = 0.0, dc = 0.0;
    size_t ring_bins = 0;
    for (int kx = 0; kx < ps.n_x; ++kx) {
        const double fx = dft_frequency(kx, ps.n_x);
        for (int kz = 0; kz < ps.n_z; ++kz) {
            const double fz = dft_frequency(kz, ps.n_z);
            const double e = ps.power[static_cast<size_t>(kx) * ps.n_z + kz];
            if (kx == 0 && kz == 0) {
                dc = e;
                continue;
            }
            const double r = std::hypot(fx, fz);
            total += e;
            if (r >= f1 && r <= f2) {
                band += e;
                ++ring_bins;
            }
        }
    }
    if (ring_bins == 0) throw ConfigError("empty focus band");
    if (total <= 1e-12 * dc) return 0.0;
    return total > 0.0 ? band / total : 0.0;
}

void require_gradient_sized(const BModeImage& img, const char* op) {
    if (img.grid.n_x < 3 || img.grid.n_z < 3)
        throw ConfigError(std::string(op) + ": image must be at least 3x3");
}

// 3x3 Sobel gradients (unnormalized kernels) with edge replication; calls
// accum(gx, gz) for every pixel in raster order
template <typename Image, typename F>
void for_each_sobel(const Image& img, F&& accum) {
    const int n_x = img.grid.n_x, n_z = img.grid.n_z;
    auto v = [&](int ix, int iz) {
        ix = std::clamp(ix, 0, n_x - 1);
        iz = std::clamp(iz, 0, n_z - 1);
        return static_cast<double>(img.value(ix, iz));
    };
    for (int ix = 0; ix < n_x; ++ix) {
        for (int iz = 0; iz < n_z; ++iz) {
            const double gx = (v(ix + 1, iz - 1) - v(ix - 1, iz - 1)) +
                              2.0 * (v(ix + 1, iz) - v(ix - 1, iz)) +
                              (v(ix + 1, iz + 1) - v(ix - 1, iz + 1));
            const double gz = (v(ix - 1, iz + 1) - v(ix - 1, iz - 1)) +
                              2.0 * (v(ix, iz + 1) - v(ix, iz - 1)) +
                              (v(ix + 1, iz + 1) - v(ix + 1, iz - 1));
            accum(gx, gz);
        }
    }
}

// separable Gaussian blur, kernel truncated at 4 sigma, edge replication
BModeImage gaussian_blur(const BModeImage& img, double sigma) {
    const int n_x = img.grid.n_x, n_z = img.grid.n_z;
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> w(radius + 1);
    double norm = 0.0;
    for (int k = -radius; k <= radius; ++k)
        norm += std::exp(-0.5 * k * k / (sigma * sigma));
    for (int k = 0; k <= radius; ++k)
        w[k] = std::exp(-0.5 * k * k / (sigma * sigma)) / norm;

    std::vector<double> tmp(img.values.size());
    // along z within each line
    for (int ix = 0; ix < n_x; ++ix) {
        for (int iz = 0; iz < n_z; ++iz) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += w[std::abs(k)] *
                       img.value(ix, std::clamp(iz + k, 0, n_z - 1));
            tmp[static_cast<size_t>(ix) * n_z + iz] = acc;
        }
    }
    // along x across lines
    std::vector<float> out(img.values.size());
    for (int ix = 0; ix < n_x; ++ix) {
        for (int iz = 0; iz < n_z; ++iz) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += w[std::abs(k)] *
                       tmp[static_cast<size_t>(std::clamp(ix + k, 0, n_x - 1)) * n_z + iz];
            out[static_cast<size_t>(ix) * n_z + iz] = static_cast<float>(acc);
        }
    }
    return BModeImage(img.grid, img.beamform_sos, img.dynamic_range, std::move(out));
}

void require_same_grid(const ImageGrid& a, const ImageGrid& b, const char* op) {
    if (!(a == b)) throw ConfigError(std::string(op) + ": image grids differ");
}

double mean_squared_error(const RFImage& i1, const RFImage& i2) {
    require_same_grid(i1.grid, i2.grid, "mse");
    double acc = 0.0;
    for (size_t i = 0; i < i1.values.size(); ++i) {
        const double d = static_cast<double>(i1.values[i]) - i2.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(i1.values.size());
}

int histogram_bin(float v, float lo, float hi, int bins) {
    if (!(hi > lo)) return 0;
    const int idx = static_cast<int>((static_cast<double>(v) - lo) /
                                     (static_cast<double>(hi) - lo) * bins);
    return std::clamp(idx, 0, bins - 1);
}

}  // namespace

MetricArity metric_arity(MetricId id) {
    switch (id) {
        case MetricId::Focus:
        case MetricId::Entropy:
        case MetricId::GradMag:
        case MetricId::Tenengrad:
        case MetricId::STTen:
            return MetricArity::SingleImage;
        case MetricId::SSIM:
        case MetricId::NegMSE:
        case MetricId::PSNR:
        case MetricId::MI:
        case MetricId::Correlation:
            return MetricArity::Pair;
        case MetricId::CV:
            return MetricArity::MultiFrame;
    }
    throw ConfigError("unknown metric id");
}

std::string metric_name(MetricId id) {
    switch (id) {
        case MetricId::Focus: return "focus";
        case MetricId::Entropy: return "entropy";
        case MetricId::GradMag: return "gradmag";
        case MetricId::Tenengrad: return "tenengrad";
        case MetricId::STTen: return "stten";
        case MetricId::SSIM: return "ssim";
        case MetricId::NegMSE: return "mse";
        case MetricId::PSNR: return "psnr";
        case MetricId::MI: return "mi";
        case MetricId::Correlation: return "corr";
        case MetricId::CV: return "cv";
    }
    throw ConfigError("unknown metric id");
}

MetricId metric_from_name(const std::string& name) {
    for (MetricId id : all_metrics())
        if (metric_name(id) == name) return id;
    throw ConfigError("unknown metric \"" + name + "\"");
}

std::vector<MetricId> all_metrics() {
    return {MetricId::Focus,  MetricId::Entropy, MetricId::GradMag,
            MetricId::Tenengrad, MetricId::STTen, MetricId::SSIM,
            MetricId::NegMSE, MetricId::PSNR,    MetricId::MI,
            MetricId::Correlation, MetricId::CV};
}

void validate_metric_params(const MetricParams& p) {
    auto bad = [](const std::string& msg) {
        throw ConfigError("metric params: " + msg);
    };
    if (!(p.focus_f1 >= 0.0 && p.focus_f1 < p.focus_f2))
        bad("focus band must satisfy 0 <= f1 < f2");
    if (p.entropy_bins < 2) bad("entropy_bins must be >= 2");
    if (p.mi_bins < 2) bad("mi_bins must be >= 2");
    if (!(p.stten_sigma > 0.0)) bad("stten_sigma must be > 0");
    if (p.stten_tau_mode == ThresholdMode::Percentile &&
        !(p.stten_tau >= 0.0 && p.stten_tau < 100.0))
        bad("stten percentile must lie in [0, 100)");
    if (p.stten_tau_mode == ThresholdMode::Absolute && !(p.stten_tau >= 0.0))
        bad("absolute stten threshold must be >= 0");
    if (!(p.ssim_k1 > 0.0 && p.ssim_k2 > 0.0)) bad("ssim k1, k2 must be > 0");
}

double focus(const BModeImage& img, const MetricParams& params) {
    validate_metric_params(params);
    return band_energy_ratio(power_spectrum(img), params.focus_f1, params.focus_f2);
}

double entropy(const BModeImage& img, int n_bins) {
    if (n_bins < 2) throw ConfigError("entropy: n_bins must be >= 2");
    const double dr = img.dynamic_range;
    std::vector<int64_t> counts(n_bins, 0);
    for (float v : img.values) {
        const int idx = static_cast<int>((static_cast<double>(v) + dr) / dr * n_bins);
        ++counts[std::clamp(idx, 0, n_bins - 1)];
    }
    const double inv_n = 1.0 / static_cast<double>(img.values.size());
    double h = 0.0;
    for (int64_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) * inv_n;
        h -= p * std::log2(p);
    }
    return h;
}

double grad_mag(const BModeImage& img) {
    require_gradient_sized(img, "grad_mag");
    double acc = 0.0;
    for_each_sobel(img, [&](double gx, double gz) {
        acc += std::sqrt(gx * gx + gz * gz);
    });
    return acc;
}

double tenengrad(const BModeImage& img) {
    require_gradient_sized(img, "tenengrad");
    double acc = 0.0;
    for_each_sobel(img, [&](double gx, double gz) { acc += gx * gx + gz * gz; });
    return acc;
}

double st_ten(const BModeImage& img, const MetricParams& params) {
    validate_metric_params(params);
    require_gradient_sized(img, "st_ten");
    BModeImage blurred = gaussian_blur(img, params.stten_sigma);

    double tau = params.stten_tau;
    if (params.stten_tau_mode == ThresholdMode::Percentile) {
        std::vector<double> mags;
        mags.reserve(blurred.values.size());
        for_each_sobel(blurred, [&](double gx, double gz) {
            mags.push_back(std::sqrt(gx * gx + gz * gz));
        });
        // threshold at the requested quantile: percentile 90 keeps exactly
        // the top 10% when magnitudes are distinct, ties are all kept
        const size_t idx = std::min(
            mags.size() - 1,
            static_cast<size_t>(params.stten_tau / 100.0 *
                                static_cast<double>(mags.size())));
        std::nth_element(mags.begin(), mags.begin() + idx, mags.end());
        tau = mags[idx];
    }

    double acc = 0.0;
    for_each_sobel(blurred, [&](double gx, double gz) {
        const double g2 = gx * gx + gz * gz;
        if (std::sqrt(g2) >= tau) acc += g2;
    });
    return acc;
}

double ssim(const RFImage& i1, const RFImage& i2, const MetricParams& params) {
    validate_metric_params(params);
    require_same_grid(i1.grid, i2.grid, "ssim");
    const int n_x = i1.grid.n_x, n_z = i1.grid.n_z;
    constexpr int kWin = 7;
    if (n_x < kWin || n_z < kWin)
        throw ConfigError("ssim: image smaller than the 7x7 window");

    float lo = i1.values[0], hi = i1.values[0];
    for (float v : i1.values) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (float v : i2.values) { lo = std::min(lo, v); hi = std::max(hi, v); }
    const double range = static_cast<double>(hi) - lo;
    // zero joint range means both images are the same constant
    if (range == 0.0) return 1.0;
    const double c1 = (params.ssim_k1 * range) * (params.ssim_k1 * range);
    const double c2 = (params.ssim_k2 * range) * (params.ssim_k2 * range);

    // integral images over value, square and cross products
    const int sx = n_x + 1, sz = n_z + 1;
    std::vector<double> s1(static_cast<size_t>(sx) * sz, 0.0), s2 = s1, s11 = s1,
                        s22 = s1, s12 = s1;
    for (int ix = 0; ix < n_x; ++ix) {
        for (int iz = 0; iz < n_z; ++iz) {
            const size_t c = static_cast<size_t>(ix + 1) * sz + (iz + 1);
            const size_t up = c - 1;
            const size_t left = c - sz;
            const size_t diag = left - 1;
            const double a = i1.value(ix, iz);
            const double b = i2.value(ix, iz);
            s1[c] = a + s1[up] + s1[left] - s1[diag];
            s2[c] = b + s2[up] + s2[left] - s2[diag];
            s11[c] = a * a + s11[up] + s11[left] - s11[diag];
            s22[c] = b * b + s22[up] + s22[left] - s22[diag];
            s12[c] = a * b + s12[up] + s12[left] - s12[diag];
        }
    }
    auto window_sum = [sz](const std::vector<double>& s, int x0, int z0) {
        const size_t a = static_cast<size_t>(x0) * sz + z0;
        const size_t b = static_cast<size_t>(x0 + kWin) * sz + (z0 + kWin);
        const size_t r = static_cast<size_t>(x0 + kWin) * sz + z0;
        const size_t d = static_cast<size_t>(x0) * sz + (z0 + kWin);
        return s[b] - s[r] - s[d] + s[a];
    };

    const double inv_w = 1.0 / (kWin * kWin);
    double acc = 0.0;
    size_t windows = 0;
    for (int x0 = 0; x0 + kWin <= n_x; ++x0) {
        for (int z0 = 0; z0 + kWin <= n_z; ++z0) {
            const double mu1 = window_sum(s1, x0, z0) * inv_w;
            const double mu2 = window_sum(s2, x0, z0) * inv_w;
            const double var1 = window_sum(s11, x0, z0) * inv_w - mu1 * mu1;
            const double var2 = window_sum(s22, x0, z0) * inv_w - mu2 * mu2;
            const double cov = window_sum(s12, x0, z0) * inv_w - mu1 * mu2;
            const double num = (2.0 * (mu1 * mu2) + c1) * (2.0 * cov + c2);
            const double den = (mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2);
            acc += num / den;
            ++windows;
        }
    }
    return acc / static_cast<double>(windows);
}

double neg_mse(const RFImage& i1, const RFImage& i2) {
    return -mean_squared_error(i1, i2);
}

double psnr(const RFImage& i1, const RFImage& i2) {
    const double mse = mean_squared_error(i1, i2);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    float peak = i1.values[0];
    for (float v : i1.values) peak = std::max(peak, v);
    for (float v : i2.values) peak = std::max(peak, v);
    return 20.0 * std::log10(static_cast<double>(peak) / std::sqrt(mse));
}

double mutual_information(const RFImage& i1, const RFImage& i2, int bins) {
    require_same_grid(i1.grid, i2.grid, "mutual_information");
    if (bins < 2) throw ConfigError("mutual_information: bins must be >= 2");

    auto min_max = [](const std::vector<float>& v) {
        float lo = v[0], hi = v[0];
        for (float x : v) { lo = std::min(lo, x); hi = std::max(hi, x); }
        return std::pair<float, float>(lo, hi);
    };
    const auto [lo1, hi1] = min_max(i1.values);
    const auto [lo2, hi2] = min_max(i2.values);

    std::vector<int64_t> joint(static_cast<size_t>(bins) * bins, 0);
    for (size_t i = 0; i < i1.values.size(); ++i) {
        const int a = histogram_bin(i1.values[i], lo1, hi1, bins);
        const int b = histogram_bin(i2.values[i], lo2, hi2, bins);
        ++joint[static_cast<size_t>(a) * bins + b];
    }
    std::vector<int64_t> row(bins, 0), col(bins, 0);
    for (int a = 0; a < bins; ++a)
        for (int b = 0; b < bins; ++b) {
            row[a] += joint[static_cast<size_t>(a) * bins + b];
            col[b] += joint[static_cast<size_t>(a) * bins + b];
        }

    const double inv_n = 1.0 / static_cast<double>(i1.values.size());
    auto term = [&](int a, int b) {
        const int64_t c = joint[static_cast<size_t>(a) * bins + b];
        if (c == 0) return 0.0;
        const double p = static_cast<double>(c) * inv_n;
        const double pa = static_cast<double>(row[a]) * inv_n;
        const double qb = static_cast<double>(col[b]) * inv_n;
        return p * std::log(p / (pa * qb));
    };
    // summing mirrored bin pairs together makes the result exactly symmetric
    // under argument swap
    double mi = 0.0;
    for (int a = 0; a < bins; ++a) {
        mi += term(a, a);
        for (int b = a + 1; b < bins; ++b) mi += term(a, b) + term(b, a);
    }
    return mi;
}

double correlation(const RFImage& i1, const RFImage& i2) {
    require_same_grid(i1.grid, i2.grid, "correlation");
    const size_t n = i1.values.size();
    double m1 = 0.0, m2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        m1 += i1.values[i];
        m2 += i2.values[i];
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    double v1 = 0.0, v2 = 0.0, cov = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double a = i1.values[i] - m1;
        const double b = i2.values[i] - m2;
        v1 += a * a;
        v2 += b * b;
        cov += a * b;
    }
    if (v1 == 0.0 || v2 == 0.0)
        throw DegenerateError("correlation: zero variance");
    return cov / std::sqrt(v1 * v2);
}

double coefficient_of_variation(const std::vector<RFImage>& frames) {
    if (frames.size() < 2)
        throw ArityError("coefficient_of_variation needs at least 2 frames, got " +
                         std::to_string(frames.size()));
    for (const RFImage& f : frames)
        require_same_grid(f.grid, frames[0].grid, "coefficient_of_variation");

    float global_peak = 0.0f;
    for (const RFImage& f : frames)
        for (float v : f.values) global_peak = std::max(global_peak, std::abs(v));
    const double eps = 1e-12 * static_cast<double>(global_peak);

    const size_t n_px = frames[0].values.size();
    const double inv_t = 1.0 / static_cast<double>(frames.size());
    double acc = 0.0;
    for (size_t i = 0; i < n_px; ++i) {
        double sum = 0.0, sum_sq = 0.0, sum_abs = 0.0;
        for (const RFImage& f : frames) {
            const double v = f.values[i];
            sum += v;
            sum_sq += v * v;
            sum_abs += std::abs(v);
        }
        const double mean_abs = sum_abs * inv_t;
        if (mean_abs == 0.0 || mean_abs < eps) continue;
        const double mean = sum * inv_t;
        const double var = std::max(0.0, sum_sq * inv_t - mean * mean);
        acc += std::sqrt(var) / mean_abs;
    }
    return acc;
}

double evaluate_single(MetricId id, const BModeImage& img, const MetricParams& params) {
    switch (id) {
        case MetricId::Focus: return focus(img, params);
        case MetricId::Entropy: return entropy(img, params.entropy_bins);
        case MetricId::GradMag: return grad_mag(img);
        case MetricId::Tenengrad: return tenengrad(img);
        case MetricId::STTen: return st_ten(img, params);
        default:
            throw ArityError("metric " + metric_name(id) +
                             " does not evaluate a single image");
    }
}

double evaluate_pair(MetricId id, const RFImage& i1, const RFImage& i2,
                     const MetricParams& params) {
    switch (id) {
        case MetricId::SSIM: return ssim(i1, i2, params);
        case MetricId::NegMSE: return neg_mse(i1, i2);
        case MetricId::PSNR: return psnr(i1, i2);
        case MetricId::MI: return mutual_information(i1, i2, params.mi_bins);
        case MetricId::Correlation: return correlation(i1, i2);
        default:
            throw ArityError("metric " + metric_name(id) +
                             " does not evaluate an image pair");
    }
}

double evaluate_multi(MetricId id, const std::vector<RFImage>& frames,
                      const MetricParams& params) {
    (void)params;
    if (id != MetricId::CV)
        throw ArityError("metric " + metric_name(id) +
                         " does not evaluate a frame set");
    return -coefficient_of_variation(frames);
}

std::pair<double, double> calibrate_focus_band(
    const std::vector<BModeImage>& sweep_bmodes,
    const std::vector<double>& candidates, double true_sos) {
    if (sweep_bmodes.empty() || sweep_bmodes.size() != candidates.size())
        throw ConfigError("calibrate_focus_band: need one B-mode per candidate");
    bool has_truth = false;
    for (double s : candidates) has_truth = has_truth || std::abs(s - true_sos) < 1e-9;
    if (!has_truth)
        throw ConfigError("calibrate_focus_band: true SoS not among the candidates");

    std::vector<PowerSpectrum> spectra;
    spectra.reserve(sweep_bmodes.size());
    for (const BModeImage& img : sweep_bmodes) spectra.push_back(power_spectrum(img));

    double best_f1 = 0.0, best_f2 = 0.0;
    double best_err = std::numeric_limits<double>::infinity();
    double best_width = -1.0;
    for (int i = 1; i <= 15; ++i) {          // f1 = 0.02 .. 0.30
        for (int j = i + 1; j <= 22; ++j) {  // f2 = f1 + 0.02 .. 0.44
            const double f1 = i * 0.02;
            const double f2 = j * 0.02;
            size_t best_c = 0;
            double best_score = -1.0;
            try {
                for (size_t c = 0; c < spectra.size(); ++c) {
                    const double score = band_energy_ratio(spectra[c], f1, f2);
                    if (score > best_score) {
                        best_score = score;
                        best_c = c;
                    }
                }
            } catch (const ConfigError&) {
                continue;  // band holds no discrete frequency of this grid
            }
            const double err = std::abs(candidates[best_c] - true_sos);
            const double width = f2 - f1;
            if (err < best_err || (err == best_err && width > best_width)) {
                best_err = err;
                best_width = width;
                best_f1 = f1;
                best_f2 = f2;
            }
        }
    }
    if (best_width < 0.0)
        throw ConfigError("calibrate_focus_band: no band intersects the grid");
    return {best_f1, best_f2};
}

}  // namespace soscal
