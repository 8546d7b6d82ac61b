#include "csiloc/prep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "csiloc/errors.hpp"
#include "csiloc/fft.hpp"

namespace csiloc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void unwrap_phases(std::vector<double>& phases) {
    double shift = 0.0;
    for (size_t i = 1; i < phases.size(); ++i) {
        double d = phases[i] + shift - phases[i - 1];
        while (d > std::numbers::pi) {
            shift -= kTwoPi;
            d -= kTwoPi;
        }
        while (d <= -std::numbers::pi) {
            shift += kTwoPi;
            d += kTwoPi;
        }
        phases[i] += shift;
    }
}

TapFilterResult tap_filter(std::span<const cplx> cfr, double threshold) {
    require(threshold > 0.0 && threshold <= 1.0, Errc::invalid_config,
            "tap filter threshold must lie in (0, 1]");
    auto cir = cfr_to_cir(cfr);
    double total = 0.0;
    for (const auto& v : cir) total += std::norm(v);
    require(total > 0.0, Errc::degenerate_input, "all-zero stream cannot be tap filtered");

    const int K = static_cast<int>(cir.size());
    int kept = K;
    double acc = 0.0;
    for (int k = 0; k < K; ++k) {
        acc += std::norm(cir[k]);
        if (acc / total >= threshold) {
            kept = k + 1;
            break;
        }
    }
    for (int k = kept; k < K; ++k) cir[k] = 0.0;
    return {cir_to_cfr(cir), kept};
}

double estimate_sfo(const CsiPacket& pkt, const RadioConfig& cfg) {
    pkt.validate();
    const int K = pkt.n_sub;
    const double kbar = (K - 1) / 2.0;
    double sxx = 0.0;
    for (int k = 0; k < K; ++k) sxx += (k - kbar) * (k - kbar);
    sxx *= pkt.n_rx * pkt.n_tx;

    double sxy = 0.0;
    std::vector<double> phases(K);
    for (int r = 0; r < pkt.n_rx; ++r) {
        for (int t = 0; t < pkt.n_tx; ++t) {
            for (int k = 0; k < K; ++k) phases[k] = std::arg(pkt.at(r, t, k));
            unwrap_phases(phases);
            double pbar = 0.0;
            for (double p : phases) pbar += p;
            pbar /= K;
            for (int k = 0; k < K; ++k) sxy += (k - kbar) * (phases[k] - pbar);
        }
    }
    return -sxy / (kTwoPi * cfg.f_delta * sxx);
}

CsiPacket remove_sfo(const CsiPacket& pkt, const RadioConfig& cfg, double rho) {
    CsiPacket out = pkt;
    for (int k = 0; k < pkt.n_sub; ++k) {
        const double ang = kTwoPi * cfg.f_delta * k * rho;
        const cplx rot(std::cos(ang), std::sin(ang));
        for (int r = 0; r < pkt.n_rx; ++r)
            for (int t = 0; t < pkt.n_tx; ++t) out.at(r, t, k) *= rot;
    }
    return out;
}

int estimate_sto_packet(const CsiPacket& pkt) {
    pkt.validate();
    std::vector<double> pdp(pkt.n_sub, 0.0);
    std::vector<cplx> stream(pkt.n_sub);
    for (int r = 0; r < pkt.n_rx; ++r)
        for (int t = 0; t < pkt.n_tx; ++t) {
            for (int k = 0; k < pkt.n_sub; ++k) stream[k] = pkt.at(r, t, k);
            auto p = power_delay_profile(stream);
            for (int k = 0; k < pkt.n_sub; ++k) pdp[k] += p[k];
        }
    return static_cast<int>(std::max_element(pdp.begin(), pdp.end()) - pdp.begin());
}

int estimate_sto(const CsiTrace& trace) {
    require(!trace.packets.empty(), Errc::invalid_input, "empty trace");
    std::map<int, int> counts;
    for (const auto& pkt : trace.packets) counts[estimate_sto_packet(pkt)]++;
    int best = 0, best_count = -1;
    for (const auto& [tap, count] : counts)
        if (count > best_count) {  // map iterates ascending: ties pick the smaller tap
            best = tap;
            best_count = count;
        }
    return best;
}

CsiPacket remove_sto(const CsiPacket& pkt, int taps) {
    require(taps >= 0 && taps < pkt.n_sub, Errc::invalid_input,
            "timing offset must lie in [0, n_sub)");
    CsiPacket out = pkt;
    for (int k = 0; k < pkt.n_sub; ++k) {
        const double ang = kTwoPi * static_cast<double>(k) * taps / pkt.n_sub;
        const cplx rot(std::cos(ang), std::sin(ang));
        for (int r = 0; r < pkt.n_rx; ++r)
            for (int t = 0; t < pkt.n_tx; ++t) out.at(r, t, k) *= rot;
    }
    return out;
}

SmoothedPacket smooth_cfo(std::span<const CsiPacket> window) {
    require(!window.empty(), Errc::invalid_input, "empty smoothing window");
    const CsiPacket& first = window.front();
    for (const auto& p : window)
        require(p.n_rx == first.n_rx && p.n_tx == first.n_tx && p.n_sub == first.n_sub,
                Errc::invalid_input, "smoothing window mixes packet shapes");

    SmoothedPacket out;
    out.packet = CsiPacket(first.n_rx, first.n_tx, first.n_sub);
    double ts = 0.0;
    for (const auto& p : window) ts += p.timestamp;
    out.packet.timestamp = ts / static_cast<double>(window.size());

    const size_t entries = first.h.size();
    std::vector<double> phases(window.size());
    for (size_t e = 0; e < entries; ++e) {
        bool degenerate = false;
        double log_mag = 0.0;
        for (const auto& p : window) {
            const double m = std::abs(p.h[e]);
            if (m <= 0.0) {
                degenerate = true;
                break;
            }
            log_mag += std::log(m);
        }
        if (degenerate) {
            out.packet.h[e] = 0.0;
            out.degenerate_entries.push_back(e);
            continue;
        }
        for (size_t n = 0; n < window.size(); ++n) phases[n] = std::arg(window[n].h[e]);
        unwrap_phases(phases);
        double mean_phase = 0.0;
        for (double p : phases) mean_phase += p;
        mean_phase /= static_cast<double>(window.size());
        const double gm = std::exp(log_mag / static_cast<double>(window.size()));
        out.packet.h[e] = cplx(gm * std::cos(mean_phase), gm * std::sin(mean_phase));
    }
    return out;
}

Calibrated calibrate(const CsiTrace& trace, const PrepConfig& cfg) {
    trace.validate();
    require(!trace.packets.empty(), Errc::invalid_input, "empty trace");
    require(cfg.cfo_window >= 1, Errc::invalid_config, "cfo window must be >= 1");
    require(static_cast<size_t>(cfg.cfo_window) <= trace.packets.size(), Errc::invalid_config,
            "trace shorter than one cfo smoothing window");

    CalibrationReport report;
    report.cfo_window = cfg.cfo_window;
    report.packets_in = static_cast<int>(trace.packets.size());

    CsiTrace work = trace;

    if (cfg.remove_sto) {
        report.sto_taps = estimate_sto(work);
        if (report.sto_taps != 0)
            for (auto& pkt : work.packets) pkt = remove_sto(pkt, report.sto_taps);
    }

    if (cfg.remove_sfo) {
        double mean_rho = 0.0;
        for (auto& pkt : work.packets) {
            const double rho = estimate_sfo(pkt, work.config);
            mean_rho += rho;
            pkt = remove_sfo(pkt, work.config, rho);
        }
        report.sfo_estimate = mean_rho / static_cast<double>(work.packets.size());
    }

    if (cfg.cfo_window > 1) {
        std::vector<CsiPacket> smoothed;
        const size_t n_windows = work.packets.size() / cfg.cfo_window;
        for (size_t w = 0; w < n_windows; ++w) {
            auto res = smooth_cfo(std::span(work.packets).subspan(w * cfg.cfo_window,
                                                                  cfg.cfo_window));
            report.degenerate_entries += res.degenerate_entries.size();
            smoothed.push_back(std::move(res.packet));
        }
        work.packets = std::move(smoothed);
    }

    if (cfg.tap_filtering) {
        report.min_kept_taps = work.config.n_sub;
        std::vector<cplx> stream(work.config.n_sub);
        for (auto& pkt : work.packets)
            for (int r = 0; r < pkt.n_rx; ++r)
                for (int t = 0; t < pkt.n_tx; ++t) {
                    for (int k = 0; k < pkt.n_sub; ++k) stream[k] = pkt.at(r, t, k);
                    auto filtered = tap_filter(stream, cfg.tap_keep_fraction);
                    report.min_kept_taps = std::min(report.min_kept_taps, filtered.kept_taps);
                    for (int k = 0; k < pkt.n_sub; ++k) pkt.at(r, t, k) = filtered.cfr[k];
                }
    }

    report.packets_out = static_cast<int>(work.packets.size());
    return {std::move(work), report};
}

} // namespace csiloc
