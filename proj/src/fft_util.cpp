#include "soscal/fft_util.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "soscal/types.hpp"

namespace soscal::fftutil {

namespace {

// FFTW planning is not thread-safe; guard the cache and all plan creation.
std::mutex g_plan_mutex;

using PlanKey = std::tuple<int, int, int>;  // n0, n1 (0 for 1-D), sign
std::map<PlanKey, fftw_plan>& plan_cache() {
    static std::map<PlanKey, fftw_plan> cache;
    return cache;
}

fftw_plan get_plan(int n0, int n1, int sign) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto& cache = plan_cache();
    const PlanKey key{n0, n1, sign};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    // Plan on a scratch buffer; FFTW_UNALIGNED keeps the plan usable with any
    // caller array via the new-array execute interface.
    fftw_complex* scratch = fftw_alloc_complex(static_cast<size_t>(n0) *
                                               (n1 > 0 ? n1 : 1));
    if (!scratch) throw Error("fft: allocation failed");
    fftw_plan plan =
        n1 > 0 ? fftw_plan_dft_2d(n0, n1, scratch, scratch, sign,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED)
               : fftw_plan_dft_1d(n0, scratch, scratch, sign,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (!plan) throw Error("fft: planning failed");
    cache.emplace(key, plan);
    return plan;
}

void execute(fftw_plan plan, std::complex<double>* data) {
    fftw_complex* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, p, p);
}

}  // namespace

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_1d(std::complex<double>* data, int n, bool inverse) {
    if (n < 1) throw ConfigError("fft: length must be >= 1");
    execute(get_plan(n, 0, inverse ? FFTW_BACKWARD : FFTW_FORWARD), data);
    if (inverse) {
        const double scale = 1.0 / n;
        for (int i = 0; i < n; ++i) data[i] *= scale;
    }
}

void fft_2d(std::complex<double>* data, int n0, int n1, bool inverse) {
    if (n0 < 1 || n1 < 1) throw ConfigError("fft: dimensions must be >= 1");
    execute(get_plan(n0, n1, inverse ? FFTW_BACKWARD : FFTW_FORWARD), data);
    if (inverse) {
        const double scale = 1.0 / (static_cast<double>(n0) * n1);
        const size_t total = static_cast<size_t>(n0) * n1;
        for (size_t i = 0; i < total; ++i) data[i] *= scale;
    }
}

}  // namespace soscal::fftutil
