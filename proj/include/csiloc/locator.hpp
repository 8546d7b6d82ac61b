#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "csiloc/aoa.hpp"
#include "csiloc/entropy.hpp"
#include "csiloc/prep.hpp"
#include "csiloc/types.hpp"

namespace csiloc {

// Prep defaults for fingerprinting. Tap filtering is off here, unlike the
// standalone calibrate default: when the channel's delay spread is below one
// tap the power threshold truncates to a single tap, which flattens the
// amplitude across subcarriers and erases the entropy fingerprint's
// information. Enable it for wideband captures whose impulse response
// genuinely spans many taps.
inline PrepConfig fingerprint_prep() {
    PrepConfig p;
    p.tap_filtering = false;
    return p;
}

// Everything needed to turn a raw survey trace into fingerprints.
struct PipelineConfig {
    PrepConfig prep = fingerprint_prep();
    EntropyConfig entropy;
    SmoothingConfig smoothing;
    AoaGrid grid;
};

struct MatchParams {
    double w_e = 0.5;        // amplitude-entropy kernel weight
    double w_a = 0.5;        // angle-delay kernel weight (w_e + w_a = 1)
    double rho_e = 0.1;      // entropy kernel decay
    double rho_a = 0.1;      // angle kernel decay
    int m_c = 12;            // candidate count
    double tau_scale = 1e9;  // seconds -> matching units (default: per nanosecond)

    void validate() const;
    bool operator==(const MatchParams&) const = default;
};

struct RpEntry {
    int id = 0;
    std::array<double, 2> location{0.0, 0.0};
    std::vector<EntropyFingerprint> entropy;  // one per access point
    std::vector<AoaTofFingerprint> aoa;       // one per access point
};

struct RadioMap {
    int format_version = 1;
    RadioConfig radio;
    std::vector<std::string> ap_ids;
    std::vector<RpEntry> rps;
    MatchParams params;
    PipelineConfig pipeline;  // settings the fingerprints were computed with

    void validate() const;
};

// One surveyed reference point: a raw trace per access point.
struct Survey {
    int rp_id = 0;
    std::array<double, 2> location{0.0, 0.0};
    std::vector<CsiTrace> per_ap;
};

// Calibrates each trace and computes both fingerprints for every reference
// point. Missing or too-short AP traces raise incomplete-survey errors naming
// the reference point and access point.
RadioMap build_radio_map(const std::vector<Survey>& surveys,
                         const std::vector<std::string>& ap_ids, const PipelineConfig& cfg);

// Manhattan distance between entropy fingerprints summed over access points.
double entropy_distance(const std::vector<EntropyFingerprint>& a,
                        const std::vector<EntropyFingerprint>& b);

// Euclidean distance over per-AP (angle, scaled delay) pairs.
double aoa_distance(const std::vector<AoaTofFingerprint>& a,
                    const std::vector<AoaTofFingerprint>& b, double tau_scale);

// Indices of the m_c map entries with the smallest entropy distance
// (ties broken by reference-point id).
std::vector<size_t> select_candidates(const RadioMap& map,
                                      const std::vector<EntropyFingerprint>& online, int m_c);

struct Candidate {
    std::array<double, 2> location{0.0, 0.0};
    double entropy_dist = 0.0;
    double aoa_dist = 0.0;
};

// Similarity in (0, 1]: w_e * exp(-rho_e * d_e) + w_a * exp(-rho_a * d_a).
// Equals 1 exactly when every weighted distance is zero.
double match_kernel(double entropy_dist, double aoa_dist, const MatchParams& params);

// Bivariate exponential-kernel regression over the candidate set.
std::array<double, 2> kernel_regress(std::span<const Candidate> candidates,
                                     const MatchParams& params);

struct CandidateDiag {
    int rp_id = 0;
    double entropy_dist = 0.0;
    double aoa_dist = 0.0;
    double kernel = 0.0;
};

struct LocateResult {
    std::array<double, 2> location{0.0, 0.0};
    std::vector<CandidateDiag> candidates;
};

// Full online pipeline: calibrate the per-AP traces, fingerprint them, select
// candidates by entropy distance and regress with both kernels.
LocateResult locate(const RadioMap& map, const std::vector<CsiTrace>& online_per_ap,
                    const PipelineConfig& cfg,
                    const std::optional<MatchParams>& override_params = {});

// Fingerprints for one reference point from both halves of its survey traces:
// the first half plays the stored map entry, the second half the held-out
// pseudo-online measurement.
struct TuningSample {
    int rp_id = 0;
    std::array<double, 2> location{0.0, 0.0};
    std::vector<EntropyFingerprint> map_entropy;
    std::vector<AoaTofFingerprint> map_aoa;
    std::vector<EntropyFingerprint> val_entropy;
    std::vector<AoaTofFingerprint> val_aoa;
};

std::vector<TuningSample> make_tuning_samples(const std::vector<Survey>& surveys,
                                              const PipelineConfig& cfg);

struct TuneGrid {
    std::vector<double> w_a;     // default 0, 0.1, .., 1
    std::vector<double> rho;     // default 0.01 * 2^i, i = 0..8 (both kernels)
    // Candidate counts 1..m_c_max are searched (clamped to the sample count).
    // The default covers a full-size survey grid: truncating candidates is a
    // speed knob, and a tight cap can pin the search away from its optimum.
    int m_c_max = 64;

    static TuneGrid defaults();
};

// Leave-one-out parameter search: for every grid point, each reference point
// in turn is located from its validation fingerprints against all others'
// map fingerprints; the mean position error is minimized. Ties prefer fewer
// candidates, then more entropy weight. Deterministic for fixed inputs.
MatchParams loocv_tune(const std::vector<TuningSample>& samples, double tau_scale = 1e9,
                       const TuneGrid& grid = TuneGrid::defaults());

// Summary statistics for a batch of localization errors.
struct EvalReport {
    std::vector<double> errors;  // per test point (m)
    double mean_error = 0.0;
    double median_error = 0.0;
    double p90_error = 0.0;
    double min_error = 0.0;
    double max_error = 0.0;

    // (error, cumulative fraction) pairs, non-decreasing to 1.
    std::vector<std::array<double, 2>> cdf;
};

EvalReport make_eval_report(std::vector<double> errors);

} // namespace csiloc
