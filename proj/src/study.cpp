#include "csiloc/study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "csiloc/errors.hpp"
#include "csiloc/rng.hpp"

namespace csiloc {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::vector<PathComponent> static_study_paths() {
    return {
        {1.0, 0.8, -15.0, 25e-9},
        {0.55, 2.1, 40.0, 90e-9},
        {0.3, 4.4, -60.0, 170e-9},
    };
}

std::vector<PathComponent> los_bench_paths() {
    return {
        {1.0, 0.3, -20.0, 30e-9},
        {0.50, 2.9, 35.0, 150e-9},
        {0.45, 1.7, 60.0, 90e-9},
        {0.40, 5.1, -55.0, 210e-9},
        {0.35, 0.9, 10.0, 120e-9},
        {0.32, 4.0, 75.0, 260e-9},
        {0.28, 2.2, -40.0, 180e-9},
        {0.25, 5.9, 50.0, 320e-9},
        {0.22, 1.2, -70.0, 240e-9},
        {0.20, 3.6, 25.0, 380e-9},
    };
}

std::vector<EntropyPacketsRow> entropy_packets_study(const std::vector<int>& packet_counts,
                                                     int n_seeds, uint64_t seed, double snr_db,
                                                     const RadioConfig& cfg) {
    require(!packet_counts.empty(), Errc::invalid_input, "no packet counts given");
    require(n_seeds >= 2, Errc::invalid_input, "need at least two seeds for a spread");
    const int max_n = *std::max_element(packet_counts.begin(), packet_counts.end());

    ImpairmentSpec imp;
    imp.snr_db = snr_db;

    EntropyConfig ecfg;
    ecfg.n_packets = 0;  // set per row

    // values[count_index][seed] = per-stream fingerprints
    std::vector<std::vector<EntropyFingerprint>> per_count(packet_counts.size());
    for (int s = 0; s < n_seeds; ++s) {
        // Each seed is its own static channel: same geometry, fresh carrier
        // phases. The spread across seeds therefore converges to the natural
        // channel-to-channel fingerprint diversity as the window grows, and
        // the window length is long enough once estimation noise sits below
        // that floor.
        auto paths = static_study_paths();
        Rng phase_rng(rp_seed(seed ^ 0xca11edull, s));
        for (auto& p : paths) p.phi = phase_rng.uniform() * 2.0 * std::numbers::pi;
        const CsiTrace trace = synth_trace(paths, cfg, imp, max_n, rp_seed(seed, s));
        for (size_t ci = 0; ci < packet_counts.size(); ++ci) {
            EntropyConfig c = ecfg;
            c.n_packets = packet_counts[ci];
            c.p_max = std::min(c.p_max, c.n_packets - 1);  // short windows cap the order
            per_count[ci].push_back(entropy_fingerprint(trace, c));
        }
    }

    // Per seed: the standard deviation of the fingerprint entries around their
    // mean. Streams genuinely differ (frequency-selective magnitudes give each
    // subcarrier its own shape), so this spread converges to the channel's own
    // dispersion; short windows inflate it with estimation noise.
    std::vector<EntropyPacketsRow> rows;
    for (size_t ci = 0; ci < packet_counts.size(); ++ci) {
        const auto& fps = per_count[ci];
        std::vector<double> stds;
        stds.reserve(fps.size());
        for (const auto& f : fps) {
            const size_t dims = f.values.size();
            double mean = 0.0;
            for (double v : f.values) mean += v;
            mean /= static_cast<double>(dims);
            double var = 0.0;
            for (double v : f.values) var += (v - mean) * (v - mean);
            var /= static_cast<double>(dims - 1);
            stds.push_back(std::sqrt(var));
        }
        EntropyPacketsRow row;
        row.n_packets = packet_counts[ci];
        row.median_std = median(stds);
        row.max_std = *std::max_element(stds.begin(), stds.end());
        rows.push_back(row);
    }
    return rows;
}

std::vector<AoaPacketsRow> aoa_packets_study(const std::vector<int>& packet_counts, int n_seeds,
                                             uint64_t seed, double snr_db,
                                             const RadioConfig& cfg) {
    require(!packet_counts.empty(), Errc::invalid_input, "no packet counts given");
    require(n_seeds >= 1, Errc::invalid_input, "need at least one seed");
    const int max_n = *std::max_element(packet_counts.begin(), packet_counts.end());

    std::vector<AoaPacketsRow> rows(packet_counts.size());
    for (size_t ci = 0; ci < packet_counts.size(); ++ci)
        rows[ci].n_packets = packet_counts[ci];

    for (int s = 0; s < n_seeds; ++s) {
        Rng scene_rng(rp_seed(seed, s));
        PathComponent path;
        path.alpha = 1.0;
        path.phi = scene_rng.uniform() * 2.0 * std::numbers::pi;
        path.theta_deg = -60.0 + 120.0 * scene_rng.uniform();
        path.tau = 30e-9;

        ImpairmentSpec imp;
        imp.snr_db = snr_db;
        const CsiTrace trace =
            synth_trace({path}, cfg, imp, max_n, rp_seed(seed ^ 0x5eedu, s));

        for (size_t ci = 0; ci < packet_counts.size(); ++ci) {
            SmoothingConfig sc;
            sc.n_packets = packet_counts[ci];
            const auto fp = aoa_fingerprint(trace, sc, AoaGrid{}, 1);
            rows[ci].mean_abs_error_deg += std::abs(fp.theta_deg - path.theta_deg);
        }
    }
    for (auto& r : rows) r.mean_abs_error_deg /= static_cast<double>(n_seeds);
    return rows;
}

std::vector<SmoothingSweepRow> smoothing_sweep_study(const std::vector<int>& lengths,
                                                     int n_seeds, uint64_t seed, double snr_db,
                                                     const RadioConfig& cfg,
                                                     const SmoothingTolerances& tol) {
    require(!lengths.empty(), Errc::invalid_input, "no smoothing lengths given");
    require(n_seeds >= 1, Errc::invalid_input, "need at least one seed");

    const auto paths = los_bench_paths();
    const PathComponent truth = ground_truth(paths);
    ImpairmentSpec imp;
    imp.snr_db = snr_db;

    std::vector<SmoothingSweepRow> rows;
    for (int length : lengths) {
        SmoothingConfig sc;
        require(length % sc.n_rx_sub == 0, Errc::invalid_input,
                "smoothing length must be a multiple of the antenna subarray size");
        sc.k_prime = length / sc.n_rx_sub;
        // Mirror the receiver constraint that no subarray may cover the
        // mid-band null subcarrier; long windows lose most placements to it.
        sc.null_subcarrier = cfg.n_sub / 2;
        SmoothingSweepRow row;
        row.length = length;
        row.n_seeds = n_seeds;
        row.feasible = length > static_cast<int>(paths.size());
        if (!row.feasible) {
            row.median_sharpness_db = std::numeric_limits<double>::quiet_NaN();
            rows.push_back(row);
            continue;
        }

        std::vector<double> sharp;
        for (int s = 0; s < n_seeds; ++s) {
            const CsiTrace trace =
                synth_trace(paths, cfg, imp, sc.n_packets, rp_seed(seed, s));
            const auto cov = multipacket_covariance(trace, sc);
            const auto eig = hermitian_eig(cov, sc.subarray_dim());
            const int n_src = estimate_num_sources(eig.values);
            const auto spectrum = music_spectrum(eig, n_src, cfg, sc, AoaGrid{});

            std::vector<SpectrumPeak> peaks;
            try {
                peaks = find_peaks(spectrum, 8);
            } catch (const Error&) {
                // featureless spectrum: counts as a lost peak
            }
            const SpectrumPeak* match = nullptr;
            for (const auto& p : peaks) {
                if (std::abs(p.theta_deg - truth.theta_deg) <= tol.theta_deg &&
                    std::abs(p.tau - truth.tau) <= tol.tau) {
                    match = &p;
                    break;
                }
            }
            if (!match) {
                sharp.push_back(-std::numeric_limits<double>::infinity());
                continue;
            }
            row.seeds_with_true_peak += 1;
            std::vector<double> power = spectrum.power;
            const double med = median(std::move(power));
            sharp.push_back(10.0 * std::log10(match->power / med));
        }
        row.median_sharpness_db = median(std::move(sharp));
        rows.push_back(row);
    }
    return rows;
}

} // namespace csiloc
