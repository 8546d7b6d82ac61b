#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "csiloc/types.hpp"

namespace csiloc {

// One propagation path arriving at the receive array.
struct PathComponent {
    double alpha = 1.0;      // amplitude gain (> 0)
    double phi = 0.0;        // carrier phase at the reference antenna (rad)
    double theta_deg = 0.0;  // angle of arrival, broadside = 0, in [-90, 90]
    double tau = 0.0;        // propagation delay (s)
};

// Receiver-side error model applied to the clean frequency response, in order:
// sampling-frequency offset (phase slope over subcarriers), symbol-timing
// offset (circular tap shift), carrier phase (initial offset + per-packet
// ramp + white jitter), then additive circular complex Gaussian noise.
struct ImpairmentSpec {
    double sfo = 0.0;                  // seconds; subcarrier k gains e^{-j*2pi*f_delta*k*sfo}
    int sto_taps = 0;                  // integer circular CIR shift, in [0, n_sub)
    double cfo_step = 0.0;             // radians added per packet index
    double cpo = 0.0;                  // radians, packet-0 carrier phase
    double cfo_jitter = 0.0;           // std-dev of white per-packet phase (rad)
    std::optional<double> snr_db;      // absent = noiseless
};

void validate_paths(const std::vector<PathComponent>& paths, const RadioConfig& cfg);

// Clean multipath frequency response for one packet (no impairments).
CsiPacket clean_packet(const std::vector<PathComponent>& paths, const RadioConfig& cfg);

// Synthesize a deterministic trace: n_packets measurements of the same static
// channel under the given error model. Identical arguments (including seed)
// produce identical traces. Packets are stamped t0 + n*dt.
CsiTrace synth_trace(const std::vector<PathComponent>& paths, const RadioConfig& cfg,
                     const ImpairmentSpec& imp, int n_packets, uint64_t seed,
                     double t0 = 0.0, double dt = 0.01);

// The path a localizer should report: smallest delay, ties by larger gain.
const PathComponent& ground_truth(const std::vector<PathComponent>& paths);

// Rectangular room with transmitters (access points) inside it. The receive
// array sits at each survey point with a fixed axis orientation; reflections
// are first-order images off the four walls.
struct RoomSpec {
    double width = 8.0;
    double height = 8.0;
    std::vector<std::array<double, 2>> tx_positions;
    double wall_loss_db = 6.0;             // amplitude loss per wall bounce
    double array_orientation_deg = 0.0;    // array axis direction, degrees from +x

    void validate() const;
};

struct ScenePoint {
    int rp_index = 0;
    std::array<double, 2> location{0.0, 0.0};
    std::vector<std::vector<PathComponent>> paths_per_tx;
};

// Multipath geometry for every reference point of a uniform grid with the
// given spacing (points centered in the cells). Geometry is deterministic;
// the seed parameter is reserved for forward compatibility and unused.
std::vector<ScenePoint> make_radio_scene(const RoomSpec& room, double rp_spacing,
                                         const RadioConfig& cfg, uint64_t seed = 0);

// Paths from one transmitter to one receiver location (direct + up to four
// first-order wall reflections, so at most five components).
std::vector<PathComponent> paths_for_link(const RoomSpec& room, std::array<double, 2> tx,
                                          std::array<double, 2> rx_location,
                                          const RadioConfig& cfg);

// Derived per-reference-point seed for parallel generation.
inline uint64_t rp_seed(uint64_t base_seed, int rp_index) {
    return base_seed ^ static_cast<uint64_t>(rp_index);
}

} // namespace csiloc
