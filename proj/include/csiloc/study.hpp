#pragma once

#include <cstdint>
#include <vector>

#include "csiloc/aoa.hpp"
#include "csiloc/entropy.hpp"
#include "csiloc/sim.hpp"

namespace csiloc {

// Monte-Carlo micro-benchmarks behind the study subcommand. The scenes and
// metrics live here so the command-line tool and the acceptance suite run
// exactly the same computation.

// Fixed three-path indoor-like channel used by the entropy study.
std::vector<PathComponent> static_study_paths();

// Line-of-sight bench scene used by the smoothing sweep: a dominant direct
// path plus nine weaker coherent reflections, enough multipath that short
// smoothing lengths cannot carry the full source count.
std::vector<PathComponent> los_bench_paths();

struct EntropyPacketsRow {
    int n_packets = 0;
    double median_std = 0.0;  // across-stream fingerprint spread, median over seeds
    double max_std = 0.0;     // worst seed
};

// Fingerprint dispersion versus amplitude-window length. Each seed is one
// static channel (same geometry, fresh path phases); per seed the across-
// stream standard deviation of the fingerprint is recorded. Long windows
// drive it down to the channel's own stream-to-stream spread; short windows
// inflate it with estimation noise.
std::vector<EntropyPacketsRow> entropy_packets_study(const std::vector<int>& packet_counts,
                                                     int n_seeds, uint64_t seed,
                                                     double snr_db,
                                                     const RadioConfig& cfg = {});

struct AoaPacketsRow {
    int n_packets = 0;
    double mean_abs_error_deg = 0.0;
};

// Angle error versus covariance window length: random single-path scenes,
// theta uniform in [-60, 60] degrees, fixed SNR.
std::vector<AoaPacketsRow> aoa_packets_study(const std::vector<int>& packet_counts, int n_seeds,
                                             uint64_t seed, double snr_db,
                                             const RadioConfig& cfg = {});

struct SmoothingTolerances {
    double theta_deg = 5.0;
    double tau = 20e-9;
};

struct SmoothingSweepRow {
    int length = 0;                   // smoothed covariance dimension (subcarriers x antennas)
    bool feasible = false;            // length exceeds the bench path count
    int n_seeds = 0;
    int seeds_with_true_peak = 0;     // detected peak within tolerance of the direct path
    double median_sharpness_db = 0.0; // peak power over median spectrum power; NaN if infeasible
};

// Peak quality versus smoothing length (the smoothed covariance dimension,
// two antennas per subarray and length/2 subcarriers) on the line-of-sight
// bench scene. A length no larger than the number of bench paths cannot hold
// that many signal dimensions and is reported infeasible without running.
// Sharpness is the dB ratio of the matched peak's power to the median
// spectrum power; seeds whose spectra lack a matching peak count as losses
// and contribute -inf sharpness.
std::vector<SmoothingSweepRow> smoothing_sweep_study(const std::vector<int>& lengths,
                                                     int n_seeds, uint64_t seed, double snr_db,
                                                     const RadioConfig& cfg = {},
                                                     const SmoothingTolerances& tol = {});

} // namespace csiloc
