#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "csiloc/types.hpp"

namespace csiloc {

// Deterministic random source. Gaussians use an explicit Box-Muller transform
// instead of std::normal_distribution so that a given seed produces the same
// stream on every standard library implementation.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Circular complex Gaussian with total variance sigma2.
    cplx cnormal(double sigma2) {
        double s = std::sqrt(sigma2 / 2.0);
        double re = normal();
        double im = normal();
        return {s * re, s * im};
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace csiloc
