#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csiloc/errors.hpp"

namespace csiloc {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;

// Radio front-end description shared by the simulator, the calibration stages
// and the angle estimator. Defaults model a 3-antenna 5.32 GHz receiver that
// reports 30 subcarriers spaced 312.5 kHz with half-wavelength elements.
struct RadioConfig {
    int n_rx = 3;
    int n_tx = 1;
    int n_sub = 30;
    double f_c = 5.32e9;
    double f_delta = 312.5e3;
    double c = kSpeedOfLight;
    double d = c / f_c / 2.0;

    double wavelength() const { return c / f_c; }

    // Returns human-readable warnings (non-fatal); throws on hard errors.
    std::vector<std::string> validate() const {
        require(n_rx >= 1 && n_tx >= 1, Errc::invalid_config, "antenna counts must be positive");
        require(n_sub >= 2, Errc::invalid_config, "need at least two subcarriers");
        require(f_c > 0 && f_delta > 0 && c > 0, Errc::invalid_config,
                "frequencies and propagation speed must be positive");
        require(d > 0, Errc::invalid_config, "antenna spacing must be positive");
        require(d <= wavelength() + 1e-12, Errc::invalid_config,
                "antenna spacing exceeds one wavelength");
        std::vector<std::string> warnings;
        if (d > wavelength() / 2.0 + 1e-12)
            warnings.push_back("antenna spacing above half a wavelength; angle estimates may alias");
        return warnings;
    }

    bool operator==(const RadioConfig&) const = default;
};

// One CSI measurement: complex frequency response laid out [rx][tx][subcarrier].
struct CsiPacket {
    double timestamp = 0.0;
    int n_rx = 0;
    int n_tx = 0;
    int n_sub = 0;
    std::vector<cplx> h;

    CsiPacket() = default;
    CsiPacket(int rx, int tx, int sub, double ts = 0.0)
        : timestamp(ts), n_rx(rx), n_tx(tx), n_sub(sub),
          h(static_cast<size_t>(rx) * tx * sub) {}

    size_t flat(int rx, int tx, int sc) const {
        return (static_cast<size_t>(rx) * n_tx + tx) * n_sub + sc;
    }
    cplx& at(int rx, int tx, int sc) { return h[flat(rx, tx, sc)]; }
    const cplx& at(int rx, int tx, int sc) const { return h[flat(rx, tx, sc)]; }

    size_t entry_count() const { return h.size(); }

    void validate() const {
        require(n_rx >= 1 && n_tx >= 1 && n_sub >= 1, Errc::invalid_input,
                "packet dimensions must be positive");
        require(h.size() == static_cast<size_t>(n_rx) * n_tx * n_sub, Errc::invalid_input,
                "packet payload size does not match dimensions");
    }

    bool operator==(const CsiPacket&) const = default;
};

// A sequence of packets from one capture, all sharing the radio configuration.
struct CsiTrace {
    RadioConfig config;
    std::vector<CsiPacket> packets;
    std::string source_id;                               // not persisted in the binary format
    std::optional<std::array<double, 2>> location_tag;   // ditto

    void validate() const {
        config.validate();
        for (const auto& p : packets) {
            p.validate();
            require(p.n_rx == config.n_rx && p.n_tx == config.n_tx && p.n_sub == config.n_sub,
                    Errc::invalid_input, "packet dimensions disagree with trace config");
        }
        for (size_t i = 1; i < packets.size(); ++i)
            require(packets[i].timestamp >= packets[i - 1].timestamp, Errc::invalid_input,
                    "packet timestamps must be non-decreasing");
    }

    bool operator==(const CsiTrace&) const = default;
};

// Time-domain taps for a single (rx, tx) stream.
struct CirVector {
    int rx = 0;
    int tx = 0;
    std::vector<cplx> taps;
};

} // namespace csiloc
