#include "csiloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csiloc/errors.hpp"
#include "csiloc/rng.hpp"

namespace csiloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx polar1(double ang) { return {std::cos(ang), std::sin(ang)}; }

} // namespace

void validate_paths(const std::vector<PathComponent>& paths, const RadioConfig& cfg) {
    require(!paths.empty(), Errc::invalid_input, "channel needs at least one path");
    const double tau_max = cfg.n_sub / (2.0 * cfg.f_delta);
    for (const auto& p : paths) {
        require(p.alpha > 0.0, Errc::invalid_input, "path gain must be positive");
        require(std::abs(p.theta_deg) <= 90.0, Errc::invalid_input,
                "angle of arrival outside [-90, 90] degrees");
        require(p.tau >= 0.0 && p.tau < tau_max, Errc::invalid_input,
                "path delay outside the resolvable span");
    }
}

CsiPacket clean_packet(const std::vector<PathComponent>& paths, const RadioConfig& cfg) {
    cfg.validate();
    validate_paths(paths, cfg);
    CsiPacket pkt(cfg.n_rx, cfg.n_tx, cfg.n_sub);
    for (const auto& path : paths) {
        const double sin_theta = std::sin(path.theta_deg * std::numbers::pi / 180.0);
        const double ant_step = -kTwoPi * cfg.f_c * cfg.d * sin_theta / cfg.c;
        const double sub_step = -kTwoPi * cfg.f_delta * path.tau;
        const cplx base = path.alpha * polar1(-path.phi);
        for (int r = 0; r < cfg.n_rx; ++r) {
            const cplx ant = polar1(ant_step * r);
            for (int k = 0; k < cfg.n_sub; ++k) {
                const cplx val = base * ant * polar1(sub_step * k);
                for (int t = 0; t < cfg.n_tx; ++t) pkt.at(r, t, k) += val;
            }
        }
    }
    return pkt;
}

CsiTrace synth_trace(const std::vector<PathComponent>& paths, const RadioConfig& cfg,
                     const ImpairmentSpec& imp, int n_packets, uint64_t seed, double t0,
                     double dt) {
    require(n_packets >= 1, Errc::invalid_input, "need at least one packet");
    require(imp.sto_taps >= 0 && imp.sto_taps < cfg.n_sub, Errc::invalid_config,
            "sto_taps must lie in [0, n_sub)");
    require(imp.cfo_jitter >= 0.0, Errc::invalid_config, "cfo_jitter must be non-negative");

    const CsiPacket clean = clean_packet(paths, cfg);

    double mean_power = 0.0;
    for (const auto& v : clean.h) mean_power += std::norm(v);
    mean_power /= static_cast<double>(clean.h.size());

    double noise_var = 0.0;
    if (imp.snr_db.has_value()) {
        require(mean_power > 0.0, Errc::degenerate_input,
                "cannot scale noise against an all-zero channel");
        noise_var = mean_power / std::pow(10.0, *imp.snr_db / 10.0);
    }

    // Per-subcarrier phase ramps for the sampling/timing offsets.
    std::vector<cplx> sub_rot(cfg.n_sub);
    for (int k = 0; k < cfg.n_sub; ++k) {
        double ang = -kTwoPi * cfg.f_delta * k * imp.sfo -
                     kTwoPi * static_cast<double>(k) * imp.sto_taps / cfg.n_sub;
        sub_rot[k] = polar1(ang);
    }

    Rng rng(seed);
    CsiTrace trace;
    trace.config = cfg;
    trace.packets.reserve(n_packets);
    for (int n = 0; n < n_packets; ++n) {
        double carrier = imp.cpo + imp.cfo_step * n;
        if (imp.cfo_jitter > 0.0) carrier += imp.cfo_jitter * rng.normal();
        const cplx carrier_rot = polar1(carrier);

        CsiPacket pkt(cfg.n_rx, cfg.n_tx, cfg.n_sub, t0 + n * dt);
        for (int r = 0; r < cfg.n_rx; ++r)
            for (int t = 0; t < cfg.n_tx; ++t)
                for (int k = 0; k < cfg.n_sub; ++k) {
                    cplx v = clean.at(r, t, k) * sub_rot[k] * carrier_rot;
                    if (noise_var > 0.0) v += rng.cnormal(noise_var);
                    pkt.at(r, t, k) = v;
                }
        trace.packets.push_back(std::move(pkt));
    }
    return trace;
}

const PathComponent& ground_truth(const std::vector<PathComponent>& paths) {
    require(!paths.empty(), Errc::invalid_input, "no paths");
    const PathComponent* best = &paths.front();
    for (const auto& p : paths) {
        if (p.tau < best->tau || (p.tau == best->tau && p.alpha > best->alpha)) best = &p;
    }
    return *best;
}

void RoomSpec::validate() const {
    require(width > 0.0 && height > 0.0, Errc::invalid_config, "room must have positive size");
    require(!tx_positions.empty(), Errc::invalid_config, "room needs at least one transmitter");
    for (const auto& t : tx_positions)
        require(t[0] > 0.0 && t[0] < width && t[1] > 0.0 && t[1] < height, Errc::invalid_config,
                "transmitters must be strictly inside the room");
}

std::vector<PathComponent> paths_for_link(const RoomSpec& room, std::array<double, 2> tx,
                                          std::array<double, 2> rx, const RadioConfig& cfg) {
    const double ax = std::cos(room.array_orientation_deg * std::numbers::pi / 180.0);
    const double ay = std::sin(room.array_orientation_deg * std::numbers::pi / 180.0);
    const double wall_gain = std::pow(10.0, -room.wall_loss_db / 20.0);

    auto make_path = [&](std::array<double, 2> src, double gain_scale) -> PathComponent {
        const double dx = src[0] - rx[0];
        const double dy = src[1] - rx[1];
        const double dist = std::hypot(dx, dy);
        require(dist > 1e-9, Errc::invalid_config, "transmitter coincides with receiver point");
        PathComponent p;
        p.tau = dist / cfg.c;
        p.alpha = gain_scale / dist;
        p.phi = std::fmod(kTwoPi * cfg.f_c * p.tau, kTwoPi);
        const double s = std::clamp((dx * ax + dy * ay) / dist, -1.0, 1.0);
        p.theta_deg = std::asin(s) * 180.0 / std::numbers::pi;
        return p;
    };

    std::vector<PathComponent> paths;
    paths.push_back(make_path(tx, 1.0));
    const std::array<std::array<double, 2>, 4> images = {{
        {-tx[0], tx[1]},
        {2.0 * room.width - tx[0], tx[1]},
        {tx[0], -tx[1]},
        {tx[0], 2.0 * room.height - tx[1]},
    }};
    for (const auto& img : images) paths.push_back(make_path(img, wall_gain));
    return paths;
}

std::vector<ScenePoint> make_radio_scene(const RoomSpec& room, double rp_spacing,
                                         const RadioConfig& cfg, uint64_t /*seed*/) {
    room.validate();
    cfg.validate();
    require(rp_spacing > 0.0, Errc::invalid_config, "grid spacing must be positive");
    const int nx = static_cast<int>(std::floor(room.width / rp_spacing + 1e-9));
    const int ny = static_cast<int>(std::floor(room.height / rp_spacing + 1e-9));
    require(nx >= 1 && ny >= 1, Errc::invalid_config, "grid spacing larger than the room");

    std::vector<ScenePoint> scene;
    scene.reserve(static_cast<size_t>(nx) * ny);
    int index = 0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            ScenePoint pt;
            pt.rp_index = index++;
            pt.location = {(i + 0.5) * rp_spacing, (j + 0.5) * rp_spacing};
            for (const auto& tx : room.tx_positions)
                pt.paths_per_tx.push_back(paths_for_link(room, tx, pt.location, cfg));
            scene.push_back(std::move(pt));
        }
    }
    return scene;
}

} // namespace csiloc
