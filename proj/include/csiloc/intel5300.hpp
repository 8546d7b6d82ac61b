#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "csiloc/types.hpp"

namespace csiloc {

// One decoded beamforming-feedback record from an Intel 5300 capture file.
// CSI values are the raw signed 8-bit pairs as reported by the NIC (no RSSI
// scaling); the antenna permutation from antenna_sel has been applied, so the
// rx index of `csi` is the physical antenna.
struct Intel5300Record {
    uint32_t timestamp_low = 0;
    uint16_t bfee_count = 0;
    uint8_t n_rx = 0;
    uint8_t n_tx = 0;
    uint8_t rssi_a = 0;
    uint8_t rssi_b = 0;
    uint8_t rssi_c = 0;
    int8_t noise = 0;
    uint8_t agc = 0;
    uint8_t antenna_sel = 0;
    uint16_t rate = 0;
    std::array<int, 3> perm{0, 1, 2};
    CsiPacket csi;
};

inline constexpr int kIntel5300Subcarriers = 30;

// Capture files are a stream of records: u16 big-endian length (counting the
// code byte), u8 record code, payload. Only code 0xBB (beamforming feedback)
// is decoded; other codes are skipped. Truncated or inconsistent records raise
// data-format/corrupt-record errors naming the byte offset.
std::vector<Intel5300Record> parse_intel5300(std::span<const uint8_t> bytes);
std::vector<Intel5300Record> parse_intel5300_file(const std::filesystem::path& path);

// Assemble a trace from decoded records; all records must share the antenna
// geometry of `radio` (n_sub is forced to 30). Timestamps come from the NIC
// microsecond clock.
CsiTrace intel5300_to_trace(const std::vector<Intel5300Record>& records, RadioConfig radio);

} // namespace csiloc
