#pragma once

// Deterministic random source. mt19937_64 has a standardized output sequence,
// but the std:: distributions do not, so the draw algorithms live here.

#include <cmath>
#include <cstdint>
#include <random>

namespace flowseg {

namespace detail {

// splitmix64 finalizer, used to decorrelate (seed, stream) pairs.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(detail::mix64(detail::mix64(seed) ^ detail::mix64(~stream))) {}

    std::uint64_t next() { return engine_(); }

    // Unbiased integer in [0, bound), bound > 0. Rejection sampling.
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t reject = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= reject) return r % bound;
        }
    }

    // Uniform in [0, 1) with 53 significant bits.
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; one spare value cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double sigma) { return sigma * normal(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace flowseg
