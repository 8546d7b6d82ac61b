#include "csiloc/aoa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csiloc/errors.hpp"

namespace csiloc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_smoothing(const RadioConfig& cfg, const SmoothingConfig& sc) {
    require(sc.k_prime >= 1 && sc.k_prime <= cfg.n_sub, Errc::invalid_config,
            "subarray subcarrier span must lie in [1, n_sub]");
    require(sc.n_rx_sub >= 1 && sc.n_rx_sub <= cfg.n_rx, Errc::invalid_config,
            "subarray antenna span must lie in [1, n_rx]");
    require(sc.subarray_dim() >= 2, Errc::invalid_config, "subarray dimension must be >= 2");
    if (sc.null_subcarrier.has_value())
        require(*sc.null_subcarrier >= 0 && *sc.null_subcarrier < cfg.n_sub,
                Errc::invalid_config, "null subcarrier index outside the band");
}

std::vector<int> subcarrier_windows(const RadioConfig& cfg, const SmoothingConfig& sc) {
    std::vector<int> starts;
    for (int ik = 0; ik + sc.k_prime <= cfg.n_sub; ++ik) {
        if (sc.null_subcarrier.has_value() && *sc.null_subcarrier >= ik &&
            *sc.null_subcarrier < ik + sc.k_prime)
            continue;  // subarrays must not cover the null subcarrier
        starts.push_back(ik);
    }
    require(!starts.empty(), Errc::invalid_config,
            "no subarray placement avoids the null subcarrier");
    return starts;
}

std::vector<double> grid_axis(double lo, double hi, double step) {
    require(step > 0.0 && hi >= lo, Errc::invalid_config, "malformed grid axis");
    std::vector<double> axis;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    axis.reserve(n);
    for (int i = 0; i < n; ++i) axis.push_back(lo + i * step);
    return axis;
}

} // namespace

std::vector<cplx> steering(double theta_deg, double tau, const RadioConfig& cfg, int n_rx_sub,
                           int k_prime) {
    require(n_rx_sub >= 1 && k_prime >= 1, Errc::invalid_input, "empty steering dimensions");
    const double sin_theta = std::sin(theta_deg * std::numbers::pi / 180.0);
    const double ant_step = -kTwoPi * cfg.f_c * cfg.d * sin_theta / cfg.c;
    const double sub_step = -kTwoPi * cfg.f_delta * tau;
    std::vector<cplx> a(static_cast<size_t>(n_rx_sub) * k_prime);
    for (int m = 0; m < n_rx_sub; ++m) {
        const cplx psi(std::cos(ant_step * m), std::sin(ant_step * m));
        for (int k = 0; k < k_prime; ++k) {
            const cplx omega(std::cos(sub_step * k), std::sin(sub_step * k));
            a[static_cast<size_t>(m) * k_prime + k] = psi * omega;
        }
    }
    return a;
}

std::vector<cplx> smoothed_covariance(const CsiPacket& pkt, const RadioConfig& cfg,
                                      const SmoothingConfig& sc) {
    pkt.validate();
    require(pkt.n_rx == cfg.n_rx && pkt.n_sub == cfg.n_sub, Errc::invalid_input,
            "packet does not match the radio configuration");
    validate_smoothing(cfg, sc);

    const int D = sc.subarray_dim();
    const auto ik_starts = subcarrier_windows(cfg, sc);
    const int t_n = cfg.n_rx - sc.n_rx_sub + 1;

    std::vector<cplx> R(static_cast<size_t>(D) * D, cplx(0.0, 0.0));
    std::vector<cplx> x(D);
    size_t count = 0;
    for (int t = 0; t < pkt.n_tx; ++t) {
        for (int in = 0; in < t_n; ++in) {
            for (int ik : ik_starts) {
                for (int m = 0; m < sc.n_rx_sub; ++m)
                    for (int k = 0; k < sc.k_prime; ++k)
                        x[static_cast<size_t>(m) * sc.k_prime + k] = pkt.at(in + m, t, ik + k);
                for (int i = 0; i < D; ++i) {
                    const cplx xi = x[i];
                    for (int j = 0; j < D; ++j)
                        R[static_cast<size_t>(i) * D + j] += xi * std::conj(x[j]);
                }
                ++count;
            }
        }
    }
    const double scale = 1.0 / static_cast<double>(count);
    for (auto& v : R) v *= scale;

    if (sc.forward_backward) {
        // (R + J conj(R) J) / 2 with J the full-dimension exchange matrix.
        std::vector<cplx> fb(R.size());
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) {
                const cplx rev = std::conj(R[static_cast<size_t>(D - 1 - i) * D + (D - 1 - j)]);
                fb[static_cast<size_t>(i) * D + j] =
                    (R[static_cast<size_t>(i) * D + j] + rev) / 2.0;
            }
        R = std::move(fb);
    }
    return R;
}

std::vector<cplx> multipacket_covariance(const CsiTrace& trace, const SmoothingConfig& sc) {
    trace.validate();
    require(sc.n_packets >= 1, Errc::invalid_config, "need at least one packet");
    require(static_cast<int>(trace.packets.size()) >= sc.n_packets, Errc::invalid_input,
            "trace shorter than the averaging window");
    const int D = sc.subarray_dim();
    std::vector<cplx> acc(static_cast<size_t>(D) * D, cplx(0.0, 0.0));
    for (int n = 0; n < sc.n_packets; ++n) {
        auto R = smoothed_covariance(trace.packets[n], trace.config, sc);
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += R[i];
    }
    for (auto& v : acc) v /= static_cast<double>(sc.n_packets);
    return acc;
}

int estimate_num_sources(std::span<const double> eigenvalues, int max_sources,
                         double floor_ratio) {
    const int d = static_cast<int>(eigenvalues.size());
    require(d >= 2, Errc::invalid_input, "need at least two eigenvalues");
    require(eigenvalues[0] > 0.0, Errc::degenerate_input, "covariance has no positive energy");
    for (int i = 1; i < d; ++i)
        require(eigenvalues[i] <= eigenvalues[i - 1] + 1e-9 * std::abs(eigenvalues[0]),
                Errc::invalid_input, "eigenvalues must be sorted descending");

    const double floor = floor_ratio * eigenvalues[0];
    const int i_max = std::min(d - 1, max_sources);
    int best_i = 1;
    double best_ratio = -1.0;
    for (int i = 1; i <= i_max; ++i) {
        const double num = std::max(eigenvalues[i - 1], floor);
        const double den = std::max(eigenvalues[i], floor);
        const double ratio = num / den;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_i = i;
        }
    }
    return best_i;
}

SpectrumGrid music_spectrum(const EigResult& eig, int n_sources, const RadioConfig& cfg,
                            const SmoothingConfig& sc, const AoaGrid& grid) {
    const int D = sc.subarray_dim();
    require(eig.dim == D, Errc::invalid_input, "eigendecomposition dimension mismatch");
    require(n_sources >= 1 && n_sources < D, Errc::invalid_input,
            "n_sources must lie in [1, dim)");

    SpectrumGrid out;
    out.theta_deg = grid_axis(grid.theta_min_deg, grid.theta_max_deg, grid.theta_step_deg);
    out.tau = grid_axis(grid.tau_min, grid.tau_max, grid.tau_step);
    out.power.assign(out.theta_deg.size() * out.tau.size(), 0.0);

    // a = psi (x) omega, so <e, a> factors through a per-delay contraction of
    // each signal eigenvector: g_m(tau) = sum_k conj(e[m*K'+k]) omega_k. Using
    // the complement identity ||E_N^H a||^2 = ||a||^2 - ||E_S^H a||^2 keeps
    // the scan O(L * n_rx_sub) per grid point.
    const size_t n_theta = out.theta_deg.size();
    const size_t n_tau = out.tau.size();
    const int L = n_sources;

    std::vector<cplx> omega(static_cast<size_t>(sc.k_prime));
    std::vector<cplx> g(static_cast<size_t>(n_tau) * L * sc.n_rx_sub);
    for (size_t iu = 0; iu < n_tau; ++iu) {
        const double sub_step = -kTwoPi * cfg.f_delta * out.tau[iu];
        for (int k = 0; k < sc.k_prime; ++k)
            omega[k] = cplx(std::cos(sub_step * k), std::sin(sub_step * k));
        for (int s = 0; s < L; ++s) {
            auto e = eig.vector(s);
            for (int m = 0; m < sc.n_rx_sub; ++m) {
                cplx acc(0.0, 0.0);
                for (int k = 0; k < sc.k_prime; ++k)
                    acc += std::conj(e[static_cast<size_t>(m) * sc.k_prime + k]) * omega[k];
                g[(iu * L + s) * sc.n_rx_sub + m] = acc;
            }
        }
    }

    const double num = static_cast<double>(D);  // a^H a for unit-modulus entries
    const double floor = num * 1e-280;
    std::vector<cplx> psi(static_cast<size_t>(sc.n_rx_sub));
    for (size_t it = 0; it < n_theta; ++it) {
        const double sin_theta = std::sin(out.theta_deg[it] * std::numbers::pi / 180.0);
        const double ant_step = -kTwoPi * cfg.f_c * cfg.d * sin_theta / cfg.c;
        for (int m = 0; m < sc.n_rx_sub; ++m)
            psi[m] = cplx(std::cos(ant_step * m), std::sin(ant_step * m));
        for (size_t iu = 0; iu < n_tau; ++iu) {
            double sig = 0.0;
            const cplx* gp = &g[iu * L * sc.n_rx_sub];
            for (int s = 0; s < L; ++s) {
                cplx acc(0.0, 0.0);
                for (int m = 0; m < sc.n_rx_sub; ++m) acc += gp[s * sc.n_rx_sub + m] * psi[m];
                sig += std::norm(acc);
            }
            const double denom = std::max(num - sig, 0.0) + floor;
            out.at(it, iu) = num / denom;
        }
    }
    return out;
}

std::vector<SpectrumPeak> find_peaks(const SpectrumGrid& grid, int max_peaks) {
    require(max_peaks >= 1, Errc::invalid_input, "max_peaks must be >= 1");
    const int nt = static_cast<int>(grid.theta_deg.size());
    const int nu = static_cast<int>(grid.tau.size());
    require(nt >= 1 && nu >= 1 && grid.power.size() == static_cast<size_t>(nt) * nu,
            Errc::invalid_input, "malformed spectrum grid");

    std::vector<SpectrumPeak> peaks;
    for (int it = 0; it < nt; ++it) {
        for (int iu = 0; iu < nu; ++iu) {
            const double v = grid.at(it, iu);
            bool is_peak = true;
            for (int dt = -1; dt <= 1 && is_peak; ++dt) {
                for (int du = -1; du <= 1; ++du) {
                    if (dt == 0 && du == 0) continue;
                    const int jt = it + dt, ju = iu + du;
                    if (jt < 0 || jt >= nt || ju < 0 || ju >= nu) continue;
                    if (grid.at(jt, ju) >= v) {
                        is_peak = false;
                        break;
                    }
                }
            }
            if (is_peak) peaks.push_back({grid.theta_deg[it], grid.tau[iu], v});
        }
    }
    require(!peaks.empty(), Errc::no_peak, "spectrum has no local maximum");
    std::stable_sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) {
        if (a.power != b.power) return a.power > b.power;
        if (a.theta_deg != b.theta_deg) return a.theta_deg < b.theta_deg;
        return a.tau < b.tau;
    });
    if (static_cast<int>(peaks.size()) > max_peaks) peaks.resize(max_peaks);
    return peaks;
}

AoaTofFingerprint aoa_fingerprint(const CsiTrace& trace, const SmoothingConfig& sc,
                                  const AoaGrid& grid, std::optional<int> n_sources_override) {
    auto cov = multipacket_covariance(trace, sc);
    const int D = sc.subarray_dim();
    auto eig = hermitian_eig(cov, D);

    int n_sources = 0;
    if (n_sources_override.has_value()) {
        n_sources = *n_sources_override;
        require(n_sources >= 1 && n_sources < D, Errc::invalid_config,
                "source count override outside [1, dim)");
    } else {
        n_sources = estimate_num_sources(eig.values);
    }

    auto spectrum = music_spectrum(eig, n_sources, trace.config, sc, grid);
    auto peaks = find_peaks(spectrum, n_sources);

    // First arrival: smallest delay; identical delays resolved by power.
    const SpectrumPeak* best = &peaks.front();
    for (const auto& p : peaks)
        if (p.tau < best->tau || (p.tau == best->tau && p.power > best->power)) best = &p;

    return {best->theta_deg, best->tau, best->power, n_sources};
}

} // namespace csiloc
