#include "soscal/imaging.hpp"

#include <cmath>
#include <complex>

#include "soscal/fft_util.hpp"

namespace soscal {

EnvelopeImage envelope(const RFImage& img) {
    const int n_z = img.grid.n_z;
    if (n_z < 4) throw ConfigError("envelope: needs at least 4 axial samples");
    const int padded = fftutil::next_pow2(n_z);
    const int half = padded / 2;

    std::vector<float> out(img.values.size());
#pragma omp parallel for schedule(static)
    for (int ix = 0; ix < img.grid.n_x; ++ix) {
        std::vector<std::complex<double>> line(padded);
        const float* src = img.values.data() + static_cast<size_t>(ix) * n_z;
        for (int iz = 0; iz < n_z; ++iz) line[iz] = src[iz];
        for (int iz = n_z; iz < padded; ++iz) line[iz] = 0.0;

        fftutil::fft_1d(line.data(), padded, false);
        // analytic signal: keep DC and Nyquist, double positive frequencies,
        // drop negative frequencies
        for (int k = 1; k < half; ++k) line[k] *= 2.0;
        for (int k = half + 1; k < padded; ++k) line[k] = 0.0;
        fftutil::fft_1d(line.data(), padded, true);

        float* dst = out.data() + static_cast<size_t>(ix) * n_z;
        for (int iz = 0; iz < n_z; ++iz)
            dst[iz] = static_cast<float>(std::abs(line[iz]));
    }
    return EnvelopeImage(img.grid, img.beamform_sos, std::move(out));
}

BModeImage log_compress(const EnvelopeImage& img, double dynamic_range) {
    if (!(std::isfinite(dynamic_range) && dynamic_range > 0.0))
        throw ConfigError("log_compress: dynamic_range must be > 0");

    float peak = 0.0f;
    for (float v : img.values) peak = std::max(peak, v);

    std::vector<float> out(img.values.size());
    if (peak == 0.0f) {
        std::fill(out.begin(), out.end(), static_cast<float>(-dynamic_range));
    } else {
        const double inv_peak = 1.0 / peak;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(out.size()); ++i) {
            const double v = img.values[i] * inv_peak;
            const double db = v > 0.0 ? 20.0 * std::log10(v) : -dynamic_range;
            out[i] = static_cast<float>(std::min(0.0, std::max(-dynamic_range, db)));
        }
    }
    return BModeImage(img.grid, img.beamform_sos, dynamic_range, std::move(out));
}

RFImage compound(const std::vector<RFImage>& frames) {
    if (frames.empty()) throw ConfigError("compound: no frames");
    const ImageGrid& grid = frames[0].grid;
    const double sos = frames[0].beamform_sos;
    for (const RFImage& f : frames) {
        if (!(f.grid == grid))
            throw ConfigError("compound: frames must share one grid");
        if (f.beamform_sos != sos)
            throw ConfigError("compound: frames must share one beamform SoS");
    }
    if (frames.size() == 1) return frames[0];

    const size_t n = grid.pixel_count();
    const double inv = 1.0 / static_cast<double>(frames.size());
    std::vector<float> out(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        double acc = 0.0;
        for (const RFImage& f : frames) acc += f.values[i];
        out[i] = static_cast<float>(acc * inv);
    }
    return RFImage(grid, sos, kCompoundedTx, std::move(out));
}

namespace {

ImageGrid sliced_grid(const ImageGrid& g, int row_begin, int row_end) {
    if (row_begin < 0 || row_end > g.n_z || row_begin >= row_end)
        throw ConfigError("slice_rows: bad row range");
    return ImageGrid(g.n_x, row_end - row_begin, g.x_min, g.x_max, g.z(row_begin),
                     g.z(row_end - 1));
}

std::vector<float> sliced_values(const std::vector<float>& v, const ImageGrid& g,
                                 int row_begin, int row_end) {
    const int rows = row_end - row_begin;
    std::vector<float> out(static_cast<size_t>(g.n_x) * rows);
    for (int ix = 0; ix < g.n_x; ++ix) {
        const float* src = v.data() + static_cast<size_t>(ix) * g.n_z + row_begin;
        std::copy(src, src + rows, out.data() + static_cast<size_t>(ix) * rows);
    }
    return out;
}

}  // namespace

RFImage slice_rows(const RFImage& img, int row_begin, int row_end) {
    return RFImage(sliced_grid(img.grid, row_begin, row_end), img.beamform_sos,
                   img.tx_index, sliced_values(img.values, img.grid, row_begin, row_end));
}

BModeImage slice_rows(const BModeImage& img, int row_begin, int row_end) {
    return BModeImage(sliced_grid(img.grid, row_begin, row_end), img.beamform_sos,
                      img.dynamic_range,
                      sliced_values(img.values, img.grid, row_begin, row_end));
}

}  // namespace soscal
