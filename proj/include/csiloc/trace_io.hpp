#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "csiloc/types.hpp"

namespace csiloc {

// Portable binary trace container (little-endian):
//   magic "CSIT", version u16 (=1),
//   header { n_rx u8, n_tx u8, n_sub u16, n_packets u32, f_c f64, f_delta f64, d f64 },
//   then per packet { timestamp f64, n_rx*n_tx*n_sub * (re f32, im f32) }
// with CFR entries in [rx][tx][subcarrier] order. Capture identity and survey
// location are carried by manifests, not by this container; the propagation
// speed is the standard constant. Malformed input raises a data-format error
// naming the byte offset.
inline constexpr uint16_t kTraceFormatVersion = 1;

std::vector<uint8_t> serialize_trace(const CsiTrace& trace);
CsiTrace deserialize_trace(std::span<const uint8_t> bytes);

void save_trace(const CsiTrace& trace, const std::filesystem::path& path);
CsiTrace load_trace(const std::filesystem::path& path);

// Write-to-temp-then-rename so readers never observe partial files.
void write_file_atomic(const std::filesystem::path& path, std::span<const uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace csiloc
