#pragma once

#include <span>
#include <utility>
#include <vector>

#include "csiloc/types.hpp"

namespace csiloc {

// Unwraps a phase sequence in place: successive differences are brought into
// (-pi, pi] by adding multiples of 2*pi.
void unwrap_phases(std::vector<double>& phases);

struct TapFilterResult {
    std::vector<cplx> cfr;  // filtered frequency response
    int kept_taps = 0;      // number of leading taps retained
};

// Keeps the smallest leading group of CIR taps holding at least `threshold`
// of total power and zeroes the rest, then transforms back.
TapFilterResult tap_filter(std::span<const cplx> cfr, double threshold = 0.9);

// Shared linear phase slope over subcarriers (least squares across all
// streams with per-stream intercepts), reported in seconds. A channel whose
// subcarrier phases fall by 2*pi*f_delta*rho per subcarrier yields +rho.
double estimate_sfo(const CsiPacket& pkt, const RadioConfig& cfg);

// Multiplies subcarrier k by e^{+j*2pi*f_delta*k*rho}, cancelling the slope
// reported by estimate_sfo.
CsiPacket remove_sfo(const CsiPacket& pkt, const RadioConfig& cfg, double rho);

// Integer timing offset: per packet the argmax of the stream-averaged power
// delay profile (tap 0 included), then the mode across packets.
int estimate_sto_packet(const CsiPacket& pkt);
int estimate_sto(const CsiTrace& trace);

// Circularly advances the CIR by `taps` (multiplies CFR subcarrier k by
// e^{+j*2pi*k*taps/n_sub}).
CsiPacket remove_sto(const CsiPacket& pkt, int taps);

struct SmoothedPacket {
    CsiPacket packet;
    std::vector<size_t> degenerate_entries;  // zero-magnitude inputs, emitted as 0
};

// Collapses a window of packets into one: per entry, the geometric mean of
// magnitudes with the arithmetic mean of unwrapped phases.
SmoothedPacket smooth_cfo(std::span<const CsiPacket> window);

struct PrepConfig {
    bool remove_sto = true;
    bool remove_sfo = true;
    int cfo_window = 1;                // 1 = no smoothing
    bool tap_filtering = true;
    double tap_keep_fraction = 0.9;
};

struct CalibrationReport {
    int sto_taps = 0;
    double sfo_estimate = 0.0;         // mean per-packet slope (s)
    int cfo_window = 1;
    int packets_in = 0;
    int packets_out = 0;
    size_t degenerate_entries = 0;
    int min_kept_taps = 0;             // over all filtered streams (0 if filter off)
};

struct Calibrated {
    CsiTrace trace;
    CalibrationReport report;
};

// Full pipeline in fixed order: timing offset, sampling-slope removal,
// carrier-phase smoothing, tap filtering.
Calibrated calibrate(const CsiTrace& trace, const PrepConfig& cfg = {});

} // namespace csiloc
