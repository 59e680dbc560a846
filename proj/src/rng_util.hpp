#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Small self-contained RNG so generated data is reproducible byte-for-byte
// across standard libraries and platforms (std:: distributions are
// implementation-defined). splitmix64 state transition, Box-Muller normals.

namespace soscal::rngutil {

inline uint64_t splitmix64_next(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stateless mix of several seeds into one stream key.
inline uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t s = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
    return splitmix64_next(s);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {
        // warm up so small seeds decorrelate
        splitmix64_next(state_);
    }

    uint64_t next_u64() { return splitmix64_next(state_); }

    // uniform in (0, 1]
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // index in [0, n)
    uint64_t bounded(uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller, one spare cached
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace soscal::rngutil
