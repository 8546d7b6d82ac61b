#include "csiloc/fft.hpp"

#include <cmath>
#include <numbers>

#include "csiloc/errors.hpp"

namespace csiloc {

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, unnormalized.
void fft_pow2(std::vector<cplx>& a, int sign) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        cplx wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Direct evaluation for arbitrary sizes (the streams here are ~30 long).
std::vector<cplx> dft_direct(std::span<const cplx> x, int sign) {
    const size_t n = x.size();
    std::vector<cplx> out(n);
    for (size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (size_t t = 0; t < n; ++t) {
            double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k * t % n) /
                         static_cast<double>(n);
            acc += x[t] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

} // namespace

std::vector<cplx> dft_unitary(std::span<const cplx> x, int sign) {
    require(!x.empty(), Errc::invalid_input, "empty vector passed to transform");
    require(sign == 1 || sign == -1, Errc::invalid_input, "transform sign must be +1 or -1");
    std::vector<cplx> out;
    if (is_pow2(x.size())) {
        out.assign(x.begin(), x.end());
        fft_pow2(out, sign);
    } else {
        out = dft_direct(x, sign);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (auto& v : out) v *= scale;
    return out;
}

std::vector<cplx> cfr_to_cir(std::span<const cplx> cfr) { return dft_unitary(cfr, 1); }

std::vector<cplx> cir_to_cfr(std::span<const cplx> cir) { return dft_unitary(cir, -1); }

std::vector<double> power_delay_profile(std::span<const cplx> cfr) {
    auto cir = cfr_to_cir(cfr);
    std::vector<double> pdp(cir.size());
    for (size_t i = 0; i < cir.size(); ++i) pdp[i] = std::norm(cir[i]);
    return pdp;
}

} // namespace csiloc
