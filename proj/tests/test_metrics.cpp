#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "soscal/metrics.hpp"

using namespace soscal;

namespace {

ImageGrid grid_of(int n_x, int n_z) {
    return ImageGrid(n_x, n_z, -1e-2, 1e-2, 1e-2, 3e-2);
}

template <typename F>
BModeImage make_bmode(int n_x, int n_z, F&& f, double dr = 60.0) {
    std::vector<float> v(static_cast<size_t>(n_x) * n_z);
    for (int ix = 0; ix < n_x; ++ix)
        for (int iz = 0; iz < n_z; ++iz)
            v[static_cast<size_t>(ix) * n_z + iz] = static_cast<float>(f(ix, iz));
    return BModeImage(grid_of(n_x, n_z), 1500.0, dr, std::move(v));
}

template <typename F>
RFImage make_rf(int n_x, int n_z, F&& f) {
    std::vector<float> v(static_cast<size_t>(n_x) * n_z);
    for (int ix = 0; ix < n_x; ++ix)
        for (int iz = 0; iz < n_z; ++iz)
            v[static_cast<size_t>(ix) * n_z + iz] = static_cast<float>(f(ix, iz));
    return RFImage(grid_of(n_x, n_z), 1500.0, 0, std::move(v));
}

// deterministic pseudo-random value in (-1, 1)
double noise(uint32_t seed, int ix, int iz) {
    std::mt19937 gen(seed * 2654435761u + ix * 40503u + iz);
    return static_cast<int32_t>(gen()) / 2147483648.0;
}

BModeImage random_bmode(int n_x, int n_z, uint32_t seed) {
    return make_bmode(n_x, n_z,
                      [&](int ix, int iz) { return -30.0 + 25.0 * noise(seed, ix, iz); });
}

RFImage random_rf(int n_x, int n_z, uint32_t seed) {
    return make_rf(n_x, n_z, [&](int ix, int iz) { return noise(seed, ix, iz); });
}

}  // namespace

TEST_CASE("focus band covering all frequencies scores exactly one") {
    MetricParams p;
    p.focus_f1 = 0.0;
    p.focus_f2 = 0.75;  // beyond the max radius sqrt(0.5)
    CHECK(focus(random_bmode(16, 24, 3), p) == 1.0);
}

TEST_CASE("focus of a constant image is zero outside DC") {
    MetricParams p;
    BModeImage img = make_bmode(16, 16, [](int, int) { return -20.0; });
    CHECK(focus(img, p) < 1e-12);
    CHECK(focus(img, p) >= 0.0);
}

TEST_CASE("focus concentrates on an in-band sinusoid") {
    // integer-period carrier at (4/32, 6/32), radius 0.225, inside the
    // default (0.10, 0.30) band; the offset sits in the discarded DC bin
    MetricParams p;
    BModeImage img = make_bmode(32, 32, [](int ix, int iz) {
        return -30.0 +
               25.0 * std::cos(2.0 * std::numbers::pi * (4.0 * ix + 6.0 * iz) / 32.0);
    });
    CHECK(focus(img, p) >= 0.99);
    CHECK(focus(img, p) <= 1.0);
}

TEST_CASE("focus rejects a band holding no discrete frequency") {
    MetricParams p;
    p.focus_f1 = 0.001;
    p.focus_f2 = 0.002;  // narrower than 1/16, misses every bin
    CHECK_THROWS_AS(focus(random_bmode(16, 16, 5), p), ConfigError);
}

TEST_CASE("entropy of flat, uniform and two-bin images") {
    BModeImage flat = make_bmode(8, 8, [](int, int) { return -33.0; });
    CHECK(entropy(flat, 256) == 0.0);

    // one pixel per bin: -59, -44, -29, -1 land in bins 0..3 of 4 over [-60, 0]
    BModeImage uniform = make_bmode(2, 2, [](int ix, int iz) {
        const double vals[4] = {-59.0, -44.0, -29.0, -1.0};
        return vals[ix * 2 + iz];
    });
    CHECK(entropy(uniform, 4) == 2.0);

    BModeImage two = make_bmode(2, 2, [](int ix, int) {
        return ix == 0 ? -59.0 : -1.0;
    });
    CHECK(entropy(two, 4) == 1.0);
    CHECK_THROWS_AS(entropy(flat, 1), ConfigError);
}

TEST_CASE("entropy stays within its bin-count bound") {
    const double h = entropy(random_bmode(32, 48, 9), 256);
    CHECK(h >= 0.0);
    CHECK(h <= std::log2(256.0));
}

TEST_CASE("gradient metrics vanish on constant images") {
    BModeImage flat = make_bmode(8, 8, [](int, int) { return -12.0; });
    CHECK(grad_mag(flat) == 0.0);
    CHECK(tenengrad(flat) == 0.0);
    MetricParams p;
    p.stten_tau_mode = ThresholdMode::Absolute;
    p.stten_tau = 0.0;
    CHECK(st_ten(flat, p) == 0.0);
}

TEST_CASE("gradient magnitude of a step edge") {
    // step of height h between columns 3 and 4: Sobel responds with 4h on the
    // two adjacent columns, so the sum is 2 * n_z * 4h
    const double h = 7.0;
    const int n_z = 12;
    BModeImage img = make_bmode(8, n_z,
                                [&](int ix, int) { return ix < 4 ? -h : 0.0; });
    CHECK(grad_mag(img) == doctest::Approx(8.0 * h * n_z).epsilon(1e-12));

    BModeImage img2 = make_bmode(8, n_z,
                                 [&](int ix, int) { return ix < 4 ? -2.0 * h : 0.0; });
    CHECK(grad_mag(img2) == 2.0 * grad_mag(img));
}

TEST_CASE("gradient magnitude ignores constant offsets") {
    BModeImage a = random_bmode(12, 16, 21);
    BModeImage b = make_bmode(12, 16, [&](int ix, int iz) {
        return a.value(ix, iz) - 4.0;
    });
    CHECK(grad_mag(b) == doctest::Approx(grad_mag(a)).epsilon(1e-9));
}

TEST_CASE("tenengrad scales quadratically and dominates grad_mag squared") {
    BModeImage a = make_bmode(10, 10, [&](int ix, int iz) {
        return -20.0 + 10.0 * noise(33, ix, iz);
    });
    BModeImage b = make_bmode(10, 10, [&](int ix, int iz) {
        return 2.0 * a.value(ix, iz);
    }, 120.0);
    CHECK(tenengrad(b) == 4.0 * tenengrad(a));
    // Cauchy-Schwarz lower bound through the pixel count
    CHECK(tenengrad(a) >=
          grad_mag(a) * grad_mag(a) / (10.0 * 10.0) - 1e-9);
}

TEST_CASE("st_ten with zero threshold approaches tenengrad for vanishing blur") {
    // sigma 0.1 puts the off-center kernel weights below double epsilon
    BModeImage img = random_bmode(24, 24, 77);
    MetricParams p;
    p.stten_sigma = 0.1;
    p.stten_tau_mode = ThresholdMode::Absolute;
    p.stten_tau = 0.0;
    CHECK(st_ten(img, p) == doctest::Approx(tenengrad(img)).epsilon(1e-12));
}

TEST_CASE("st_ten threshold above every gradient yields zero") {
    BModeImage img = random_bmode(16, 16, 6);
    MetricParams p;
    p.stten_tau_mode = ThresholdMode::Absolute;
    p.stten_tau = 1e12;
    CHECK(st_ten(img, p) == 0.0);
}

TEST_CASE("st_ten percentile threshold keeps the top gradients") {
    // independent recomputation: blur, Sobel and quantile done longhand
    const int n = 6;
    BModeImage img = random_bmode(n, n, 123);
    MetricParams p;
    p.stten_sigma = 0.5;
    p.stten_tau_mode = ThresholdMode::Percentile;
    p.stten_tau = 75.0;

    const double sigma = p.stten_sigma;
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> w(2 * radius + 1);
    double norm = 0.0;
    for (int k = -radius; k <= radius; ++k)
        norm += std::exp(-0.5 * k * k / (sigma * sigma));
    for (int k = -radius; k <= radius; ++k)
        w[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma)) / norm;
    auto at = [&](int ix, int iz) {
        return static_cast<double>(
            img.value(std::clamp(ix, 0, n - 1), std::clamp(iz, 0, n - 1)));
    };
    std::vector<double> blurred(n * n);
    for (int ix = 0; ix < n; ++ix)
        for (int iz = 0; iz < n; ++iz) {
            double acc = 0.0;
            for (int kx = -radius; kx <= radius; ++kx)
                for (int kz = -radius; kz <= radius; ++kz)
                    acc += w[kx + radius] * w[kz + radius] * at(ix + kx, iz + kz);
            blurred[ix * n + iz] = acc;
        }
    auto bl = [&](int ix, int iz) {
        return blurred[std::clamp(ix, 0, n - 1) * n + std::clamp(iz, 0, n - 1)];
    };
    std::vector<double> g2(n * n), gm(n * n);
    for (int ix = 0; ix < n; ++ix)
        for (int iz = 0; iz < n; ++iz) {
            const double gx = bl(ix + 1, iz - 1) - bl(ix - 1, iz - 1) +
                              2.0 * (bl(ix + 1, iz) - bl(ix - 1, iz)) +
                              bl(ix + 1, iz + 1) - bl(ix - 1, iz + 1);
            const double gz = bl(ix - 1, iz + 1) - bl(ix - 1, iz - 1) +
                              2.0 * (bl(ix, iz + 1) - bl(ix, iz - 1)) +
                              bl(ix + 1, iz + 1) - bl(ix + 1, iz - 1);
            g2[ix * n + iz] = gx * gx + gz * gz;
            gm[ix * n + iz] = std::sqrt(gx * gx + gz * gz);
        }
    std::vector<double> sorted = gm;
    std::sort(sorted.begin(), sorted.end());
    const double tau = sorted[static_cast<size_t>(0.75 * n * n)];
    double expected = 0.0;
    size_t kept = 0;
    for (int i = 0; i < n * n; ++i)
        if (gm[i] >= tau) {
            expected += g2[i];
            ++kept;
        }
    CHECK(kept == 9);  // top quarter of 36 pixels
    CHECK(st_ten(img, p) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("ssim identity, symmetry and mean-shift penalty") {
    MetricParams p;
    RFImage a = random_rf(12, 16, 50);
    CHECK(ssim(a, a, p) == 1.0);

    RFImage b = random_rf(12, 16, 51);
    CHECK(ssim(a, b, p) == ssim(b, a, p));
    CHECK(ssim(a, b, p) >= -1.0 - 1e-9);
    CHECK(ssim(a, b, p) <= 1.0 + 1e-9);

    RFImage shifted = make_rf(12, 16, [&](int ix, int iz) {
        return a.value(ix, iz) + 10.0;
    });
    CHECK(ssim(a, shifted, p) < 1.0);
}

TEST_CASE("ssim of opposed constant images matches the closed form") {
    MetricParams p;
    RFImage zeros = make_rf(7, 7, [](int, int) { return 0.0; });
    RFImage ones = make_rf(7, 7, [](int, int) { return 1.0; });
    // single window, L = 1: (2*0*1 + 1e-4)(0 + 9e-4) / ((0+1+1e-4)(0+9e-4))
    CHECK(ssim(zeros, ones, p) == doctest::Approx(1e-4 / 1.0001).epsilon(1e-12));
    // both constant and equal means zero data range, perfect similarity
    CHECK(ssim(zeros, zeros, p) == 1.0);
}

TEST_CASE("ssim rejects mismatched or undersized images") {
    MetricParams p;
    RFImage a = random_rf(8, 8, 1);
    RFImage b = random_rf(8, 9, 1);
    CHECK_THROWS_AS(ssim(a, b, p), ConfigError);
    RFImage tiny = random_rf(6, 8, 1);
    CHECK_THROWS_AS(ssim(tiny, tiny, p), ConfigError);
}

TEST_CASE("neg_mse oracle values and symmetry") {
    RFImage a = make_rf(2, 1, [](int ix, int) { return ix == 0 ? 0.0 : 0.0; });
    RFImage b = make_rf(2, 1, [](int ix, int) { return ix == 0 ? 3.0 : 4.0; });
    CHECK(neg_mse(a, b) == -12.5);
    CHECK(neg_mse(b, a) == -12.5);

    RFImage c = random_rf(9, 11, 2);
    CHECK(neg_mse(c, c) == 0.0);
    RFImage d = make_rf(9, 11, [&](int ix, int iz) { return c.value(ix, iz) + 2.0; });
    CHECK(neg_mse(c, d) == doctest::Approx(-4.0).epsilon(1e-6));
    CHECK(neg_mse(c, random_rf(9, 11, 3)) <= 0.0);
}

TEST_CASE("psnr oracle value, monotonicity and identical-image signal") {
    RFImage a = make_rf(1, 1, [](int, int) { return 255.0; });
    RFImage b = make_rf(1, 1, [](int, int) { return 250.0; });
    // MAX 255, MSE 25: 20 log10(255/5)
    CHECK(psnr(a, b) == doctest::Approx(34.1514).epsilon(1e-4));

    RFImage c = make_rf(2, 2, [](int ix, int iz) {
        return (ix == 0 && iz == 0) ? 255.0 : 100.0;
    });
    RFImage d_full = make_rf(2, 2, [&](int ix, int iz) {
        return c.value(ix, iz) - 5.0;
    });
    RFImage d_half = make_rf(2, 2, [&](int ix, int iz) {
        return (ix == 0) ? c.value(ix, iz) - 5.0 : c.value(ix, iz);
    });
    // halving the MSE at fixed MAX adds 10 log10 2 dB
    CHECK(psnr(c, d_half) - psnr(c, d_full) ==
          doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));

    CHECK(std::isinf(psnr(c, c)));
    CHECK(psnr(c, c) > 0.0);
}

TEST_CASE("mutual information of identical uniform images is log of bins") {
    RFImage a = make_rf(2, 2, [](int ix, int iz) {
        return static_cast<double>(ix * 2 + iz);
    });
    CHECK(mutual_information(a, a, 4) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("mutual information is exactly symmetric and near zero when independent") {
    RFImage a = random_rf(64, 96, 7);
    RFImage b = random_rf(64, 96, 8);
    CHECK(mutual_information(a, b, 20) == mutual_information(b, a, 20));

    RFImage big_a = random_rf(256, 3072, 100);
    RFImage big_b = random_rf(256, 3072, 200);
    const double mi = mutual_information(big_a, big_b, 20);
    CHECK(mi >= 0.0);
    CHECK(mi < 0.05);
}

TEST_CASE("mutual information of a constant image is zero") {
    RFImage flat = make_rf(4, 4, [](int, int) { return 2.5; });
    RFImage other = random_rf(4, 4, 9);
    CHECK(mutual_information(flat, other, 20) == 0.0);
    CHECK(mutual_information(other, flat, 20) == 0.0);
}

TEST_CASE("correlation of affine, inverted and independent images") {
    RFImage a = random_rf(16, 16, 11);
    RFImage affine = make_rf(16, 16, [&](int ix, int iz) {
        return 2.0 * a.value(ix, iz) + 5.0;
    });
    CHECK(correlation(a, affine) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(correlation(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    RFImage neg = make_rf(16, 16, [&](int ix, int iz) { return -a.value(ix, iz); });
    CHECK(correlation(a, neg) == doctest::Approx(-1.0).epsilon(1e-12));

    RFImage b = random_rf(16, 16, 12);
    const double r = correlation(a, b);
    CHECK(r == correlation(b, a));
    CHECK(std::abs(r) <= 1.0 + 1e-9);

    RFImage flat = make_rf(16, 16, [](int, int) { return 3.0; });
    CHECK_THROWS_AS(correlation(a, flat), DegenerateError);
}

TEST_CASE("coefficient of variation oracle values") {
    // one-pixel frames of 1 and 3: mean 2, population std 1
    RFImage one = make_rf(1, 1, [](int, int) { return 1.0; });
    RFImage three = make_rf(1, 1, [](int, int) { return 3.0; });
    CHECK(coefficient_of_variation({one, three}) == 0.5);

    RFImage f = random_rf(8, 8, 13);
    CHECK(coefficient_of_variation({f, f, f, f}) == 0.0);
}

TEST_CASE("coefficient of variation ignores global positive scaling") {
    // quantized, offset values keep the tripled frames exactly representable
    // and the per-pixel means safely away from zero
    auto quantized = [](uint32_t seed, int ix, int iz) {
        return 2.0 + std::floor(1024.0 * noise(seed, ix, iz)) / 1024.0;
    };
    std::vector<RFImage> frames;
    for (uint32_t s = 0; s < 3; ++s)
        frames.push_back(make_rf(8, 12, [&](int ix, int iz) {
            return quantized(40 + s, ix, iz);
        }));
    const double cv = coefficient_of_variation(frames);

    std::vector<RFImage> doubled;
    for (const RFImage& f : frames)
        doubled.push_back(make_rf(8, 12, [&](int ix, int iz) {
            return 2.0 * f.value(ix, iz);
        }));
    CHECK(coefficient_of_variation(doubled) == cv);

    std::vector<RFImage> tripled;
    for (const RFImage& f : frames)
        tripled.push_back(make_rf(8, 12, [&](int ix, int iz) {
            return 3.0 * f.value(ix, iz);
        }));
    CHECK(coefficient_of_variation(tripled) == doctest::Approx(cv).epsilon(1e-12));
}

TEST_CASE("coefficient of variation rejects bad frame sets") {
    RFImage a = random_rf(4, 4, 1);
    CHECK_THROWS_AS(coefficient_of_variation({a}), ArityError);
    CHECK_THROWS_AS(coefficient_of_variation({}), ArityError);
    RFImage b = random_rf(4, 5, 1);
    CHECK_THROWS_AS(coefficient_of_variation({a, b}), ConfigError);
}

TEST_CASE("metric names round-trip and arities partition the metrics") {
    int singles = 0, pairs = 0, multis = 0;
    for (MetricId id : all_metrics()) {
        CHECK(metric_from_name(metric_name(id)) == id);
        switch (metric_arity(id)) {
            case MetricArity::SingleImage: ++singles; break;
            case MetricArity::Pair: ++pairs; break;
            case MetricArity::MultiFrame: ++multis; break;
        }
    }
    CHECK(singles == 5);
    CHECK(pairs == 5);
    CHECK(multis == 1);
    CHECK(metric_from_name("mse") == MetricId::NegMSE);
    CHECK_THROWS_AS(metric_from_name("bogus"), ConfigError);
}

TEST_CASE("evaluate boundary enforces arity and larger-is-better signs") {
    MetricParams p;
    BModeImage bm = random_bmode(16, 16, 60);
    RFImage a = random_rf(16, 16, 61);
    RFImage b = random_rf(16, 16, 62);

    CHECK(evaluate_single(MetricId::Entropy, bm, p) == entropy(bm, p.entropy_bins));
    CHECK_THROWS_AS(evaluate_single(MetricId::SSIM, bm, p), ArityError);
    CHECK_THROWS_AS(evaluate_single(MetricId::CV, bm, p), ArityError);

    CHECK(evaluate_pair(MetricId::NegMSE, a, b, p) == neg_mse(a, b));
    CHECK(evaluate_pair(MetricId::NegMSE, a, b, p) <= 0.0);
    CHECK_THROWS_AS(evaluate_pair(MetricId::Focus, a, b, p), ArityError);
    CHECK_THROWS_AS(evaluate_pair(MetricId::CV, a, b, p), ArityError);

    CHECK(evaluate_multi(MetricId::CV, {a, b}, p) ==
          -coefficient_of_variation({a, b}));
    CHECK(evaluate_multi(MetricId::CV, {a, b}, p) <= 0.0);
    CHECK_THROWS_AS(evaluate_multi(MetricId::PSNR, {a, b}, p), ArityError);
}

TEST_CASE("metric params are validated") {
    MetricParams p;
    p.focus_f1 = 0.3;
    p.focus_f2 = 0.2;
    CHECK_THROWS_AS(validate_metric_params(p), ConfigError);
    p = MetricParams{};
    p.entropy_bins = 1;
    CHECK_THROWS_AS(validate_metric_params(p), ConfigError);
    p = MetricParams{};
    p.stten_sigma = 0.0;
    CHECK_THROWS_AS(validate_metric_params(p), ConfigError);
    p = MetricParams{};
    p.stten_tau = 100.0;
    CHECK_THROWS_AS(validate_metric_params(p), ConfigError);
    p = MetricParams{};
    p.mi_bins = 0;
    CHECK_THROWS_AS(validate_metric_params(p), ConfigError);
}

TEST_CASE("focus band calibration finds the discriminating band") {
    // candidate 0 is the truth. Its image carries one carrier at radius
    // 0.125 plus one at 0.685 (outside every band); the decoy at candidate 1
    // carries radius 0.375. Bands containing 0.125 but not 0.375 pick the
    // truth; the widest such band is (0.02, 0.36).
    BModeImage truth = make_bmode(32, 32, [](int ix, int iz) {
        return -30.0 +
               14.0 * std::cos(2.0 * std::numbers::pi * (4.0 * ix + 0.0 * iz) / 32.0) +
               14.0 * std::cos(2.0 * std::numbers::pi * (16.0 * ix + 15.0 * iz) / 32.0);
    });
    BModeImage decoy = make_bmode(32, 32, [](int ix, int iz) {
        return -30.0 +
               14.0 * std::cos(2.0 * std::numbers::pi * (12.0 * ix + 0.0 * iz) / 32.0);
    });
    auto [f1, f2] = calibrate_focus_band({truth, decoy}, {1500.0, 1510.0}, 1500.0);
    CHECK(f1 == doctest::Approx(0.02));
    CHECK(f2 == doctest::Approx(0.36));
}

TEST_CASE("focus band calibration tie-breaks toward the widest band") {
    // single-candidate sweep: every band scores zero error
    BModeImage only = random_bmode(32, 32, 90);
    auto [f1, f2] = calibrate_focus_band({only}, {1540.0}, 1540.0);
    CHECK(f1 == doctest::Approx(0.02));
    CHECK(f2 == doctest::Approx(0.44));
}

TEST_CASE("focus band calibration validates its inputs") {
    BModeImage img = random_bmode(16, 16, 91);
    CHECK_THROWS_AS(calibrate_focus_band({}, {}, 1500.0), ConfigError);
    CHECK_THROWS_AS(calibrate_focus_band({img}, {1500.0}, 1501.0), ConfigError);
    CHECK_THROWS_AS(calibrate_focus_band({img, img}, {1500.0}, 1500.0), ConfigError);
}
