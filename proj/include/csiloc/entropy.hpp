#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csiloc/types.hpp"

namespace csiloc {

struct RescaleBounds {
    double lo = 0.0;
    double hi = 0.0;
};

// Extremes of the samples, used to map them onto the unit support.
RescaleBounds auto_bounds(std::span<const double> samples);

// Affine map of samples onto [-0.5, 0.5]; bounds with hi <= lo are rejected.
std::vector<double> rescale(std::span<const double> samples, RescaleBounds bounds);

// All-pole model fitted to a sample sequence: denominator 1 + sum a_i z^-i.
struct ArModel {
    int order = 0;
    std::vector<double> coeffs;  // a_1..a_order
    double sigma2 = 0.0;         // innovation variance from the fit
    double norm_sigma2 = 0.0;    // rescaled so the spectrum averages to 1 on the grid
};

// Biased autocovariance estimates r(0..max_lag): the sample mean is removed
// so a constant input yields the degenerate r(0) = 0.
std::vector<double> autocorr_biased(std::span<const double> samples, int max_lag);

struct LevinsonResult {
    std::vector<double> coeffs;       // final order-p coefficients
    std::vector<double> error_seq;    // prediction error for orders 0..p
    std::vector<double> reflection;   // k_1..k_p
};

// Levinson-Durbin recursion on an autocorrelation sequence.
LevinsonResult levinson(std::span<const double> r, int order);

// Yule-Walker fit at a fixed order (samples must not be constant).
ArModel fit_ar(std::span<const double> samples, int order);

enum class OrderCriterion { eef, aic };

// Exponentially-embedded-family order selection over 1..p_max (ties to the
// smaller order, minimum 1). `aic` is an alternative for comparison studies.
int select_order(std::span<const double> samples, int p_max = 20,
                 OrderCriterion criterion = OrderCriterion::eef);

// Model power spectrum on a uniform grid beta_j = -0.5 + j/grid_size,
// normalized so its Riemann mean is exactly 1. Updates nothing; the returned
// model copy carries norm_sigma2. Throws if the model is unstable.
std::vector<double> ar_psd(const ArModel& model, int grid_size = 1024);

// True whether all poles are strictly inside the unit circle.
bool ar_stable(const ArModel& model);

// Model autocorrelation R(0..lags) solved exactly from the Yule-Walker system
// and extended by the AR recursion.
std::vector<double> ar_autocorrelation(const ArModel& model, int lags);

struct EntropyResult {
    double value = 0.0;      // frequency-domain Riemann sum of -S log S
    double cepstral = 0.0;   // lag-domain cross-check (autocorrelation x cepstrum)
};

// Differential entropy of the normalized model spectrum viewed as a density
// on the unit support. Never exceeds 0 (uniform bound). The cepstral value is
// an independent lag-domain evaluation of the same integral.
double spectral_entropy(const ArModel& model, int grid_size = 1024);
EntropyResult spectral_entropy_dual(const ArModel& model, int grid_size = 1024);

struct StreamIndex {
    int tx = 0;
    int rx = 0;
    int subcarrier = 0;
    bool operator==(const StreamIndex&) const = default;
};

struct EntropyConfig {
    int n_packets = 50;    // amplitude window length
    int p_max = 20;
    int grid_size = 1024;
    OrderCriterion criterion = OrderCriterion::eef;
};

struct EntropyFingerprint {
    std::vector<double> values;          // one entropy per retained stream
    std::vector<StreamIndex> streams;    // position -> (tx, rx, subcarrier)
    std::vector<uint8_t> degenerate;     // 1 where the stream was constant
    std::vector<int> orders;             // selected model orders (diagnostic)
    std::vector<double> sigma2;          // innovation variances (diagnostic)

    bool operator==(const EntropyFingerprint& o) const {
        return values == o.values && streams == o.streams && degenerate == o.degenerate;
    }
};

// Amplitude-entropy fingerprint: one entropy value per (tx, rx, subcarrier)
// stream, excluding the first and last subcarrier of every link. Constant
// streams are flagged and pinned to the upper entropy bound 0.
EntropyFingerprint entropy_fingerprint(const CsiTrace& trace, const EntropyConfig& cfg = {});

} // namespace csiloc
