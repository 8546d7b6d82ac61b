#pragma once

#include <optional>
#include <span>
#include <vector>

#include "csiloc/eig.hpp"
#include "csiloc/types.hpp"

namespace csiloc {

// Joint angle-delay estimation on subcarrier-antenna subarrays.
struct SmoothingConfig {
    int k_prime = 8;                       // subcarriers per subarray
    int n_rx_sub = 2;                      // antennas per subarray
    bool forward_backward = true;
    int n_packets = 15;                    // packets averaged into the covariance
    std::optional<int> null_subcarrier;    // physical index to keep out of subarrays

    int subarray_dim() const { return k_prime * n_rx_sub; }
};

struct AoaGrid {
    double theta_min_deg = -90.0;
    double theta_max_deg = 90.0;
    double theta_step_deg = 1.0;
    double tau_min = -50e-9;
    double tau_max = 450e-9;
    double tau_step = 2e-9;
};

// Steering vector for one (angle, delay) over an n_rx_sub x k_prime subarray,
// antenna-major: a[(m * k_prime) + k] = psi_m(theta) * omega_k(tau).
std::vector<cplx> steering(double theta_deg, double tau, const RadioConfig& cfg, int n_rx_sub,
                           int k_prime);

// Spatially smoothed covariance of one packet (averaged over all subarrays
// and transmit chains), optionally forward-backward averaged. Row-major,
// dimension subarray_dim().
std::vector<cplx> smoothed_covariance(const CsiPacket& pkt, const RadioConfig& cfg,
                                      const SmoothingConfig& sc);

// Mean of per-packet smoothed covariances over the first n_packets packets.
std::vector<cplx> multipacket_covariance(const CsiTrace& trace, const SmoothingConfig& sc);

// Source count from the largest consecutive eigenvalue ratio. Candidates are
// i in [1, min(dim-1, max_sources)]; the trailing eigenvalue is floored at
// floor_ratio times the largest to keep ratios finite.
int estimate_num_sources(std::span<const double> eigenvalues, int max_sources = 10,
                         double floor_ratio = 1e-9);

struct SpectrumGrid {
    std::vector<double> theta_deg;  // ascending axis
    std::vector<double> tau;        // ascending axis (s)
    std::vector<double> power;      // [theta][tau], row-major

    double& at(size_t it, size_t iu) { return power[it * tau.size() + iu]; }
    double at(size_t it, size_t iu) const { return power[it * tau.size() + iu]; }
};

// MUSIC pseudo-spectrum P = (a^H a) / (a^H E_N E_N^H a) over the grid, using
// the eigendecomposition of the smoothed covariance and n_sources signal
// dimensions. Values are finite and positive; orthogonal-to-noise points
// saturate at the numeric ceiling rather than dividing by zero.
SpectrumGrid music_spectrum(const EigResult& eig, int n_sources, const RadioConfig& cfg,
                            const SmoothingConfig& sc, const AoaGrid& grid = {});

struct SpectrumPeak {
    double theta_deg = 0.0;
    double tau = 0.0;
    double power = 0.0;
};

// Strict 8-neighborhood local maxima, strongest first (ties broken by axis
// order for determinism). Throws no_peak when the grid has no local maximum.
std::vector<SpectrumPeak> find_peaks(const SpectrumGrid& grid, int max_peaks);

struct AoaTofFingerprint {
    double theta_deg = 0.0;
    double tau = 0.0;
    double peak_power = 0.0;
    int n_sources = 0;

    bool operator==(const AoaTofFingerprint&) const = default;
};

// First-arrival (smallest-delay) peak of the multi-packet MUSIC spectrum.
// n_sources is estimated from the eigenvalue gaps unless overridden.
AoaTofFingerprint aoa_fingerprint(const CsiTrace& trace, const SmoothingConfig& sc,
                                  const AoaGrid& grid = {},
                                  std::optional<int> n_sources_override = {});

} // namespace csiloc
