#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace csirf {

namespace detail {

// splitmix64; used only to spread (seed, stream) pairs into engine seeds.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Deterministic random stream. Distinct (seed, stream) pairs give
/// independent sequences, so parallel producers can derive one stream per
/// work item and the output stays independent of scheduling.
///
/// Gaussian draws use the polar-free Box-Muller transform implemented here
/// rather than std::normal_distribution, whose algorithm is
/// implementation-defined; every byte of output is pinned by this file.
class RandomStream {
public:
    explicit RandomStream(uint64_t seed, uint64_t stream = 0) {
        uint64_t s = seed;
        uint64_t a = detail::splitmix64(s);
        s ^= 0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL;
        uint64_t b = detail::splitmix64(s);
        engine_.seed(a ^ (b << 1));
    }

    /// Uniform in [0, 1).
    double uniform() {
        // 53 random bits -> double mantissa
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    uint64_t uniform_index(uint64_t n) {
        // rejection sampling keeps the distribution exact
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    /// Standard normal, Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circular complex normal with E|z|^2 = 1.
    std::complex<double> complex_normal() {
        double re = normal();
        double im = normal();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

    uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace csirf
