#pragma once

#include <span>
#include <vector>

#include "csiloc/types.hpp"

namespace csiloc {

// Unitary discrete Fourier transform pair (1/sqrt(N) both directions), so a
// round trip is the identity and energy is preserved. `sign` is the exponent
// sign: -1 for the forward (time -> frequency) direction.
std::vector<cplx> dft_unitary(std::span<const cplx> x, int sign);

// Frequency response -> impulse response for one stream. A pure delay of
// m/(n_sub*f_delta) seconds lands on tap m.
std::vector<cplx> cfr_to_cir(std::span<const cplx> cfr);

// Impulse response -> frequency response (inverse of cfr_to_cir).
std::vector<cplx> cir_to_cfr(std::span<const cplx> cir);

// Power delay profile |h_t|^2 of one stream's frequency response.
std::vector<double> power_delay_profile(std::span<const cplx> cfr);

} // namespace csiloc
