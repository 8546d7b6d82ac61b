#include "csiloc/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "csiloc/errors.hpp"
#include "csiloc/fft.hpp"

namespace csiloc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// |1 + sum a_i e^{-j*2pi*i*beta}|^2 evaluated at one normalized frequency.
double denom_at(std::span<const double> a, double beta) {
    double re = 1.0, im = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double ang = -kTwoPi * static_cast<double>(i + 1) * beta;
        re += a[i] * std::cos(ang);
        im += a[i] * std::sin(ang);
    }
    return re * re + im * im;
}

std::vector<double> raw_psd(const ArModel& model, int grid_size) {
    require(grid_size >= 8, Errc::invalid_config, "spectrum grid too small");
    require(model.sigma2 > 0.0, Errc::degenerate_input, "model variance must be positive");
    require(ar_stable(model), Errc::numeric, "unstable model has no spectrum");
    std::vector<double> s(grid_size);
    for (int j = 0; j < grid_size; ++j) {
        const double beta = -0.5 + static_cast<double>(j) / grid_size;
        s[j] = model.sigma2 / denom_at(model.coeffs, beta);
    }
    return s;
}

} // namespace

RescaleBounds auto_bounds(std::span<const double> samples) {
    require(!samples.empty(), Errc::invalid_input, "no samples");
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    return {*lo, *hi};
}

std::vector<double> rescale(std::span<const double> samples, RescaleBounds bounds) {
    require(!samples.empty(), Errc::invalid_input, "no samples");
    require(bounds.hi > bounds.lo, Errc::invalid_bounds,
            "rescale bounds are degenerate (hi <= lo)");
    const double span = bounds.hi - bounds.lo;
    std::vector<double> out(samples.size());
    for (size_t i = 0; i < samples.size(); ++i)
        out[i] = (samples[i] - bounds.lo) / span - 0.5;
    return out;
}

std::vector<double> autocorr_biased(std::span<const double> samples, int max_lag) {
    require(!samples.empty(), Errc::invalid_input, "no samples");
    require(max_lag >= 0 && max_lag < static_cast<int>(samples.size()), Errc::invalid_input,
            "autocorrelation lag must be below the sample count");
    const size_t n = samples.size();
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(n);
    std::vector<double> r(max_lag + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (size_t t = 0; t + k < n; ++t)
            acc += (samples[t] - mean) * (samples[t + k] - mean);
        r[k] = acc / static_cast<double>(n);
    }
    return r;
}

LevinsonResult levinson(std::span<const double> r, int order) {
    require(order >= 1, Errc::invalid_input, "order must be >= 1");
    require(static_cast<int>(r.size()) >= order + 1, Errc::invalid_input,
            "need autocorrelation lags 0..order");
    require(r[0] > 0.0, Errc::degenerate_input, "zero-power input (r(0) == 0)");

    LevinsonResult out;
    out.error_seq.assign(order + 1, 0.0);
    out.error_seq[0] = r[0];
    std::vector<double> a;  // current coefficients a_1..a_m
    for (int m = 1; m <= order; ++m) {
        double acc = r[m];
        for (int i = 1; i < m; ++i) acc += a[i - 1] * r[m - i];
        const double e_prev = out.error_seq[m - 1];
        require(e_prev > 0.0, Errc::degenerate_input,
                "prediction error collapsed to zero (singular autocorrelation)");
        const double k = -acc / e_prev;
        require(std::abs(k) < 1.0 + 1e-12, Errc::degenerate_input,
                "reflection coefficient outside the unit interval");
        std::vector<double> next(m);
        for (int i = 1; i < m; ++i) next[i - 1] = a[i - 1] + k * a[m - i - 1];
        next[m - 1] = k;
        a = std::move(next);
        out.reflection.push_back(k);
        out.error_seq[m] = e_prev * (1.0 - k * k);
    }
    out.coeffs = std::move(a);
    return out;
}

ArModel fit_ar(std::span<const double> samples, int order) {
    require(static_cast<int>(samples.size()) > order, Errc::invalid_input,
            "need more samples than the model order");
    const auto bounds = auto_bounds(samples);
    require(bounds.hi > bounds.lo, Errc::degenerate_input,
            "constant samples cannot be modelled");
    auto r = autocorr_biased(samples, order);
    auto lev = levinson(r, order);
    ArModel model;
    model.order = order;
    model.coeffs = std::move(lev.coeffs);
    model.sigma2 = lev.error_seq.back();
    require(model.sigma2 > 0.0, Errc::degenerate_input, "fit collapsed to zero variance");
    model.norm_sigma2 = model.sigma2;
    return model;
}

int select_order(std::span<const double> samples, int p_max, OrderCriterion criterion) {
    require(p_max >= 1, Errc::invalid_input, "p_max must be >= 1");
    require(static_cast<int>(samples.size()) > p_max, Errc::invalid_input,
            "need more samples than p_max");
    {
        const auto bounds = auto_bounds(samples);
        require(bounds.hi > bounds.lo, Errc::degenerate_input,
                "constant samples cannot be modelled");
    }
    const double n = static_cast<double>(samples.size());
    auto r = autocorr_biased(samples, p_max);
    auto lev = levinson(r, p_max);

    int best_k = 1;
    if (criterion == OrderCriterion::eef) {
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 1; k <= p_max; ++k) {
            const double xi = n * std::log(lev.error_seq[0] / lev.error_seq[k]);
            const double score = xi > k ? xi - k * (std::log(xi / k) + 1.0) : 0.0;
            if (score > best) {
                best = score;
                best_k = k;
            }
        }
    } else {
        double best = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= p_max; ++k) {
            const double score = n * std::log(lev.error_seq[k]) + 2.0 * k;
            if (score < best) {
                best = score;
                best_k = k;
            }
        }
    }
    return best_k;
}

bool ar_stable(const ArModel& model) {
    // Step-down recursion: stable iff every reflection coefficient lies in
    // the open unit interval.
    std::vector<double> a = model.coeffs;
    for (int m = static_cast<int>(a.size()); m >= 1; --m) {
        const double k = a[m - 1];
        if (std::abs(k) >= 1.0) return false;
        if (m == 1) break;
        std::vector<double> prev(m - 1);
        const double denom = 1.0 - k * k;
        for (int i = 1; i < m; ++i) prev[i - 1] = (a[i - 1] - k * a[m - i - 1]) / denom;
        a = std::move(prev);
    }
    return true;
}

std::vector<double> ar_psd(const ArModel& model, int grid_size) {
    auto s = raw_psd(model, grid_size);
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(grid_size);
    require(mean > 0.0, Errc::numeric, "spectrum integrated to zero");
    for (double& v : s) v /= mean;
    return s;
}

std::vector<double> ar_autocorrelation(const ArModel& model, int lags) {
    require(lags >= 0, Errc::invalid_input, "lags must be non-negative");
    require(ar_stable(model), Errc::numeric, "unstable model has no autocorrelation");
    const int p = model.order;
    const auto& a = model.coeffs;

    // Solve R(k) + sum_i a_i R(|k-i|) = sigma2*[k==0] for R(0..p).
    const int n = p + 1;
    std::vector<double> mat(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> rhs(n, 0.0);
    rhs[0] = model.sigma2;
    for (int k = 0; k < n; ++k) {
        mat[static_cast<size_t>(k) * n + k] += 1.0;
        for (int i = 1; i <= p; ++i) mat[static_cast<size_t>(k) * n + std::abs(k - i)] += a[i - 1];
    }
    // Gaussian elimination with partial pivoting (tiny system).
    std::vector<double> x = rhs;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(mat[static_cast<size_t>(row) * n + col]) >
                std::abs(mat[static_cast<size_t>(piv) * n + col]))
                piv = row;
        require(std::abs(mat[static_cast<size_t>(piv) * n + col]) > 1e-300, Errc::numeric,
                "singular autocorrelation system");
        if (piv != col) {
            for (int j = 0; j < n; ++j)
                std::swap(mat[static_cast<size_t>(piv) * n + j],
                          mat[static_cast<size_t>(col) * n + j]);
            std::swap(x[piv], x[col]);
        }
        for (int row = col + 1; row < n; ++row) {
            const double f = mat[static_cast<size_t>(row) * n + col] /
                             mat[static_cast<size_t>(col) * n + col];
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j)
                mat[static_cast<size_t>(row) * n + j] -= f * mat[static_cast<size_t>(col) * n + j];
            x[row] -= f * x[col];
        }
    }
    std::vector<double> R(n, 0.0);
    for (int row = n - 1; row >= 0; --row) {
        double acc = x[row];
        for (int j = row + 1; j < n; ++j) acc -= mat[static_cast<size_t>(row) * n + j] * R[j];
        R[row] = acc / mat[static_cast<size_t>(row) * n + row];
    }

    R.resize(lags + 1, 0.0);
    for (int k = n; k <= lags; ++k) {
        double acc = 0.0;
        for (int i = 1; i <= p; ++i) acc -= a[i - 1] * R[k - i];
        R[k] = acc;
    }
    return R;
}

double spectral_entropy(const ArModel& model, int grid_size) {
    auto s = ar_psd(model, grid_size);
    double h = 0.0;
    for (double v : s) h -= v * std::log(v);
    return h / static_cast<double>(grid_size);
}

EntropyResult spectral_entropy_dual(const ArModel& model, int grid_size) {
    auto s_raw = raw_psd(model, grid_size);
    double norm = 0.0;
    for (double v : s_raw) norm += v;
    norm /= static_cast<double>(grid_size);

    EntropyResult out;
    std::vector<double> log_s(grid_size);
    for (int j = 0; j < grid_size; ++j) {
        const double v = s_raw[j] / norm;
        log_s[j] = std::log(v);
        out.value -= v * log_s[j];
    }
    out.value /= static_cast<double>(grid_size);

    // Lag-domain route: -sum_i R(i) Z(i) with R the model autocorrelation of
    // the normalized spectrum and Z the cepstrum of log S on the same grid.
    // Z(i) = (1/N) sum_j log S(beta_j) e^{+j*2pi*i*beta_j} with beta_j starting
    // at -0.5, which is (-1)^i times the DFT over an index-ordered grid.
    const int max_lag = grid_size / 2;
    auto R = ar_autocorrelation(model, max_lag);
    const double r_scale = 1.0 / norm;
    std::vector<cplx> f(log_s.begin(), log_s.end());
    auto spec = dft_unitary(f, 1);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(grid_size));
    double acc = 0.0;
    for (int i = 0; i <= max_lag; ++i) {
        const double z = (i % 2 == 0 ? 1.0 : -1.0) * spec[i].real() * inv_sqrt_n;
        acc += (i == 0 ? 1.0 : 2.0) * (R[i] * r_scale) * z;
    }
    out.cepstral = -acc;
    return out;
}

EntropyFingerprint entropy_fingerprint(const CsiTrace& trace, const EntropyConfig& cfg) {
    trace.validate();
    require(cfg.n_packets >= 2, Errc::invalid_config, "need at least two packets of amplitudes");
    require(static_cast<int>(trace.packets.size()) >= cfg.n_packets, Errc::invalid_input,
            "trace shorter than the fingerprint window");
    require(trace.config.n_sub >= 3, Errc::invalid_input,
            "need at least three subcarriers to drop the edge pair");
    require(cfg.n_packets > cfg.p_max, Errc::invalid_config,
            "window must exceed the maximum model order");

    EntropyFingerprint fp;
    std::vector<double> samples(cfg.n_packets);
    for (int r = 0; r < trace.config.n_rx; ++r) {
        for (int t = 0; t < trace.config.n_tx; ++t) {
            for (int k = 1; k < trace.config.n_sub - 1; ++k) {
                for (int n = 0; n < cfg.n_packets; ++n)
                    samples[n] = std::abs(trace.packets[n].at(r, t, k));
                fp.streams.push_back({t, r, k});
                const auto bounds = auto_bounds(samples);
                if (bounds.hi - bounds.lo <= 1e-300) {
                    // Constant stream: flat density, entropy at the bound.
                    fp.values.push_back(0.0);
                    fp.degenerate.push_back(1);
                    fp.orders.push_back(0);
                    fp.sigma2.push_back(0.0);
                    continue;
                }
                const auto scaled = rescale(samples, bounds);
                const int order = select_order(scaled, cfg.p_max, cfg.criterion);
                const auto model = fit_ar(scaled, order);
                fp.values.push_back(spectral_entropy(model, cfg.grid_size));
                fp.degenerate.push_back(0);
                fp.orders.push_back(order);
                fp.sigma2.push_back(model.sigma2);
            }
        }
    }
    return fp;
}

} // namespace csiloc
