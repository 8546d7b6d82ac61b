#include "csiloc/locator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csiloc/errors.hpp"

namespace csiloc {

void MatchParams::validate() const {
    require(w_e >= 0.0 && w_a >= 0.0, Errc::invalid_config, "kernel weights must be >= 0");
    require(std::abs(w_e + w_a - 1.0) < 1e-9, Errc::invalid_config,
            "kernel weights must sum to 1");
    require(rho_e > 0.0 && rho_a > 0.0, Errc::invalid_config, "kernel decays must be > 0");
    require(m_c >= 1, Errc::invalid_config, "candidate count must be >= 1");
    require(tau_scale > 0.0, Errc::invalid_config, "tau_scale must be > 0");
}

void RadioMap::validate() const {
    require(format_version == 1, Errc::data_format, "unsupported radio map format version");
    require(!ap_ids.empty(), Errc::invalid_config, "radio map needs at least one access point");
    require(!rps.empty(), Errc::invalid_config, "radio map needs at least one reference point");
    radio.validate();
    params.validate();
    for (const auto& rp : rps) {
        require(rp.entropy.size() == ap_ids.size() && rp.aoa.size() == ap_ids.size(),
                Errc::data_format,
                "reference point " + std::to_string(rp.id) +
                    " does not cover every access point");
        for (size_t a = 1; a < rp.entropy.size(); ++a)
            require(rp.entropy[a].values.size() == rp.entropy[0].values.size(),
                    Errc::data_format, "entropy fingerprint length mismatch across APs");
    }
    for (size_t i = 1; i < rps.size(); ++i)
        for (size_t a = 0; a < ap_ids.size(); ++a)
            require(rps[i].entropy[a].values.size() == rps[0].entropy[a].values.size(),
                    Errc::data_format, "entropy fingerprint length mismatch across RPs");
}

namespace {

struct RpFingerprints {
    std::vector<EntropyFingerprint> entropy;
    std::vector<AoaTofFingerprint> aoa;
};

// The amplitude branch keeps the configured tap filter; the phase branch
// never tap-filters, since truncating the impulse response to the dominant
// tap erases the inter-subcarrier delay structure the spectrum search needs.
PrepConfig phase_prep(PrepConfig prep) {
    prep.tap_filtering = false;
    return prep;
}

struct FingerprintPair {
    EntropyFingerprint entropy;
    AoaTofFingerprint aoa;
};

FingerprintPair fingerprint_trace(const CsiTrace& raw, const PipelineConfig& cfg) {
    FingerprintPair out;
    out.entropy = entropy_fingerprint(calibrate(raw, cfg.prep).trace, cfg.entropy);
    out.aoa = aoa_fingerprint(calibrate(raw, phase_prep(cfg.prep)).trace, cfg.smoothing,
                              cfg.grid);
    return out;
}

RpFingerprints fingerprint_rp(const Survey& s, const std::vector<std::string>& ap_ids,
                              const PipelineConfig& cfg) {
    RpFingerprints out;
    for (size_t a = 0; a < ap_ids.size(); ++a) {
        const CsiTrace& raw = s.per_ap[a];
        const auto where = "reference point " + std::to_string(s.rp_id) + ", access point " +
                           ap_ids[a];
        require(!raw.packets.empty(), Errc::incomplete_survey, "empty trace at " + where);
        try {
            auto fp = fingerprint_trace(raw, cfg);
            out.entropy.push_back(std::move(fp.entropy));
            out.aoa.push_back(fp.aoa);
        } catch (const Error& e) {
            if (e.code() == Errc::invalid_input || e.code() == Errc::degenerate_input)
                fail(Errc::incomplete_survey, std::string(e.what()) + " at " + where);
            throw;
        }
    }
    return out;
}

} // namespace

RadioMap build_radio_map(const std::vector<Survey>& surveys,
                         const std::vector<std::string>& ap_ids, const PipelineConfig& cfg) {
    require(!surveys.empty(), Errc::invalid_input, "no surveys given");
    require(!ap_ids.empty(), Errc::invalid_input, "no access points given");
    RadioMap map;
    map.ap_ids = ap_ids;
    map.pipeline = cfg;
    map.radio = surveys.front().per_ap.empty() ? RadioConfig{}
                                               : surveys.front().per_ap.front().config;
    for (const auto& s : surveys) {
        require(s.per_ap.size() == ap_ids.size(), Errc::incomplete_survey,
                "reference point " + std::to_string(s.rp_id) + " has " +
                    std::to_string(s.per_ap.size()) + " traces for " +
                    std::to_string(ap_ids.size()) + " access points");
        RpEntry e;
        e.id = s.rp_id;
        e.location = s.location;
        auto fp = fingerprint_rp(s, ap_ids, cfg);
        e.entropy = std::move(fp.entropy);
        e.aoa = std::move(fp.aoa);
        map.rps.push_back(std::move(e));
    }
    std::sort(map.rps.begin(), map.rps.end(),
              [](const RpEntry& a, const RpEntry& b) { return a.id < b.id; });
    map.validate();
    return map;
}

double entropy_distance(const std::vector<EntropyFingerprint>& a,
                        const std::vector<EntropyFingerprint>& b) {
    require(a.size() == b.size(), Errc::invalid_input,
            "entropy fingerprints cover different access-point counts");
    double d = 0.0;
    for (size_t ap = 0; ap < a.size(); ++ap) {
        require(a[ap].values.size() == b[ap].values.size(), Errc::invalid_input,
                "entropy fingerprint dimension mismatch");
        for (size_t i = 0; i < a[ap].values.size(); ++i)
            d += std::abs(a[ap].values[i] - b[ap].values[i]);
    }
    return d;
}

double aoa_distance(const std::vector<AoaTofFingerprint>& a,
                    const std::vector<AoaTofFingerprint>& b, double tau_scale) {
    require(a.size() == b.size(), Errc::invalid_input,
            "angle-delay fingerprints cover different access-point counts");
    double acc = 0.0;
    for (size_t ap = 0; ap < a.size(); ++ap) {
        const double dth = a[ap].theta_deg - b[ap].theta_deg;
        const double dta = tau_scale * (a[ap].tau - b[ap].tau);
        acc += dth * dth + dta * dta;
    }
    return std::sqrt(acc);
}

std::vector<size_t> select_candidates(const RadioMap& map,
                                      const std::vector<EntropyFingerprint>& online, int m_c) {
    require(m_c >= 1, Errc::invalid_input, "candidate count must be >= 1");
    require(!map.rps.empty(), Errc::invalid_input, "empty radio map");
    std::vector<std::pair<double, size_t>> ranked;
    ranked.reserve(map.rps.size());
    for (size_t i = 0; i < map.rps.size(); ++i)
        ranked.emplace_back(entropy_distance(map.rps[i].entropy, online), i);
    std::sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first < y.first;
        return map.rps[x.second].id < map.rps[y.second].id;
    });
    const size_t keep = std::min<size_t>(static_cast<size_t>(m_c), ranked.size());
    std::vector<size_t> out;
    out.reserve(keep);
    for (size_t i = 0; i < keep; ++i) out.push_back(ranked[i].second);
    return out;
}

double match_kernel(double entropy_dist, double aoa_dist, const MatchParams& params) {
    require(entropy_dist >= 0.0 && aoa_dist >= 0.0, Errc::invalid_input,
            "kernel distances must be >= 0");
    return params.w_e * std::exp(-params.rho_e * entropy_dist) +
           params.w_a * std::exp(-params.rho_a * aoa_dist);
}

std::array<double, 2> kernel_regress(std::span<const Candidate> candidates,
                                     const MatchParams& params) {
    require(!candidates.empty(), Errc::invalid_input, "kernel regression over empty set");
    params.validate();
    double wsum = 0.0, x = 0.0, y = 0.0;
    for (const auto& c : candidates) {
        const double k = match_kernel(c.entropy_dist, c.aoa_dist, params);
        wsum += k;
        x += k * c.location[0];
        y += k * c.location[1];
    }
    require(wsum > 0.0, Errc::numeric, "kernel weights vanished");
    return {x / wsum, y / wsum};
}

LocateResult locate(const RadioMap& map, const std::vector<CsiTrace>& online_per_ap,
                    const PipelineConfig& cfg,
                    const std::optional<MatchParams>& override_params) {
    map.validate();
    require(online_per_ap.size() == map.ap_ids.size(), Errc::invalid_input,
            "online measurement has " + std::to_string(online_per_ap.size()) +
                " traces for " + std::to_string(map.ap_ids.size()) + " access points");
    const MatchParams params = override_params.value_or(map.params);
    params.validate();

    std::vector<EntropyFingerprint> ent;
    std::vector<AoaTofFingerprint> aoa;
    for (size_t a = 0; a < online_per_ap.size(); ++a) {
        auto fp = fingerprint_trace(online_per_ap[a], cfg);
        ent.push_back(std::move(fp.entropy));
        aoa.push_back(fp.aoa);
    }

    const auto idx = select_candidates(map, ent, params.m_c);
    std::vector<Candidate> cands;
    LocateResult res;
    for (size_t i : idx) {
        const RpEntry& rp = map.rps[i];
        Candidate c;
        c.location = rp.location;
        c.entropy_dist = entropy_distance(rp.entropy, ent);
        c.aoa_dist = aoa_distance(rp.aoa, aoa, params.tau_scale);
        cands.push_back(c);
        res.candidates.push_back({rp.id, c.entropy_dist, c.aoa_dist, 0.0});
    }
    double wsum = 0.0;
    for (size_t i = 0; i < cands.size(); ++i) {
        const double k = match_kernel(cands[i].entropy_dist, cands[i].aoa_dist, params);
        res.candidates[i].kernel = k;
        wsum += k;
    }
    if (wsum > 0.0)
        for (auto& c : res.candidates) c.kernel /= wsum;
    res.location = kernel_regress(cands, params);
    return res;
}

std::vector<TuningSample> make_tuning_samples(const std::vector<Survey>& surveys,
                                              const PipelineConfig& cfg) {
    require(!surveys.empty(), Errc::invalid_input, "no surveys given");
    std::vector<TuningSample> out;
    for (const auto& s : surveys) {
        TuningSample t;
        t.rp_id = s.rp_id;
        t.location = s.location;
        for (size_t a = 0; a < s.per_ap.size(); ++a) {
            const CsiTrace& raw = s.per_ap[a];
            const size_t half = raw.packets.size() / 2;
            require(half >= 1, Errc::incomplete_survey,
                    "trace too short to split at reference point " + std::to_string(s.rp_id));
            CsiTrace first = raw, second = raw;
            first.packets.assign(raw.packets.begin(), raw.packets.begin() + half);
            second.packets.assign(raw.packets.begin() + half, raw.packets.end());
            try {
                auto fp_a = fingerprint_trace(first, cfg);
                auto fp_b = fingerprint_trace(second, cfg);
                t.map_entropy.push_back(std::move(fp_a.entropy));
                t.map_aoa.push_back(fp_a.aoa);
                t.val_entropy.push_back(std::move(fp_b.entropy));
                t.val_aoa.push_back(fp_b.aoa);
            } catch (const Error& e) {
                if (e.code() == Errc::invalid_input || e.code() == Errc::degenerate_input)
                    fail(Errc::incomplete_survey,
                         std::string(e.what()) + " at reference point " +
                             std::to_string(s.rp_id) + " while splitting for tuning");
                throw;
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

TuneGrid TuneGrid::defaults() {
    TuneGrid g;
    for (int i = 0; i <= 10; ++i) g.w_a.push_back(0.1 * i);
    for (int i = 0; i <= 8; ++i) g.rho.push_back(0.01 * std::pow(2.0, i));
    return g;
}

namespace {

// Mean error of locating every sample's validation fingerprints against all
// other samples' map fingerprints.
double loocv_error(const std::vector<TuningSample>& samples, const MatchParams& p) {
    double total = 0.0;
    const size_t n = samples.size();
    for (size_t held = 0; held < n; ++held) {
        std::vector<std::pair<double, size_t>> ranked;
        for (size_t j = 0; j < n; ++j) {
            if (j == held) continue;
            ranked.emplace_back(
                entropy_distance(samples[j].map_entropy, samples[held].val_entropy), j);
        }
        std::sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first < y.first;
            return samples[x.second].rp_id < samples[y.second].rp_id;
        });
        const size_t keep = std::min<size_t>(static_cast<size_t>(p.m_c), ranked.size());
        std::vector<Candidate> cands;
        for (size_t i = 0; i < keep; ++i) {
            const auto& src = samples[ranked[i].second];
            Candidate c;
            c.location = src.location;
            c.entropy_dist = ranked[i].first;
            c.aoa_dist = aoa_distance(src.map_aoa, samples[held].val_aoa, p.tau_scale);
            cands.push_back(c);
        }
        const auto est = kernel_regress(cands, p);
        const double dx = est[0] - samples[held].location[0];
        const double dy = est[1] - samples[held].location[1];
        total += std::sqrt(dx * dx + dy * dy);
    }
    return total / static_cast<double>(n);
}

} // namespace

MatchParams loocv_tune(const std::vector<TuningSample>& samples, double tau_scale,
                       const TuneGrid& grid) {
    require(samples.size() >= 2, Errc::invalid_input,
            "parameter search needs at least two reference points");
    require(!grid.w_a.empty() && !grid.rho.empty() && grid.m_c_max >= 1, Errc::invalid_config,
            "empty tuning grid");

    const int m_c_hi =
        std::min<int>(grid.m_c_max, static_cast<int>(samples.size()) - 1);
    MatchParams best;
    double best_err = std::numeric_limits<double>::infinity();
    bool have_best = false;

    // Candidate-count ascending, angle weight ascending: on ties the first
    // (fewest candidates, most entropy weight) wins.
    for (int m_c = 1; m_c <= m_c_hi; ++m_c) {
        for (double w_a : grid.w_a) {
            for (double rho_e : grid.rho) {
                for (double rho_a : grid.rho) {
                    MatchParams p;
                    p.w_a = w_a;
                    p.w_e = 1.0 - w_a;
                    p.rho_e = rho_e;
                    p.rho_a = rho_a;
                    p.m_c = m_c;
                    p.tau_scale = tau_scale;
                    const double err = loocv_error(samples, p);
                    if (!have_best || err < best_err) {
                        best = p;
                        best_err = err;
                        have_best = true;
                    }
                }
            }
        }
    }
    return best;
}

EvalReport make_eval_report(std::vector<double> errors) {
    require(!errors.empty(), Errc::invalid_input, "no errors to summarize");
    EvalReport r;
    r.errors = errors;
    std::vector<double> sorted = std::move(errors);
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    r.mean_error = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    r.min_error = sorted.front();
    r.max_error = sorted.back();
    r.median_error = (n % 2 == 1) ? sorted[n / 2]
                                  : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    // Nearest-rank percentile: smallest value with at least 90% of mass at or
    // below it.
    const size_t rank = static_cast<size_t>(std::ceil(0.9 * static_cast<double>(n)));
    r.p90_error = sorted[std::max<size_t>(rank, 1) - 1];
    r.cdf.reserve(n);
    for (size_t i = 0; i < n; ++i)
        r.cdf.push_back({sorted[i], static_cast<double>(i + 1) / static_cast<double>(n)});
    return r;
}

} // namespace csiloc
