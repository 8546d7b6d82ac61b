#include "csiloc/intel5300.hpp"

#include <fstream>

#include "csiloc/errors.hpp"

namespace csiloc {

namespace {

constexpr uint8_t kBfeeCode = 0xBB;
constexpr size_t kBfeeHeaderBytes = 20;

size_t expected_csi_bytes(int n_rx, int n_tx) {
    size_t bits = static_cast<size_t>(kIntel5300Subcarriers) * (n_rx * n_tx * 16 + 3);
    return (bits + 7) / 8;
}

// Reads the signed 8-bit value starting at bit offset `bitoff` (LSB-first
// packing, values may straddle byte boundaries).
int8_t read_i8_bits(std::span<const uint8_t> payload, size_t bitoff) {
    size_t byte = bitoff >> 3;
    int rem = static_cast<int>(bitoff & 7);
    uint16_t v = payload[byte];
    if (rem != 0) v = static_cast<uint16_t>((v >> rem) | (payload[byte + 1] << (8 - rem)));
    return static_cast<int8_t>(v & 0xFF);
}

Intel5300Record decode_bfee(std::span<const uint8_t> p, size_t record_offset) {
    auto corrupt = [&](const std::string& why) {
        fail(Errc::corrupt_record,
             "corrupt record at byte offset " + std::to_string(record_offset) + ": " + why);
    };
    if (p.size() < kBfeeHeaderBytes) corrupt("payload shorter than the fixed header");

    Intel5300Record rec;
    rec.timestamp_low = static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
                        static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
    rec.bfee_count = static_cast<uint16_t>(p[4] | p[5] << 8);
    // p[6], p[7]: reserved
    rec.n_rx = p[8];
    rec.n_tx = p[9];
    rec.rssi_a = p[10];
    rec.rssi_b = p[11];
    rec.rssi_c = p[12];
    rec.noise = static_cast<int8_t>(p[13]);
    rec.agc = p[14];
    rec.antenna_sel = p[15];
    uint16_t len = static_cast<uint16_t>(p[16] | p[17] << 8);
    rec.rate = static_cast<uint16_t>(p[18] | p[19] << 8);

    if (rec.n_rx < 1 || rec.n_rx > 3 || rec.n_tx < 1 || rec.n_tx > 3)
        corrupt("antenna counts out of range");
    if (len != expected_csi_bytes(rec.n_rx, rec.n_tx))
        corrupt("csi length " + std::to_string(len) + " does not match " +
                std::to_string(expected_csi_bytes(rec.n_rx, rec.n_tx)) + " for " +
                std::to_string(rec.n_rx) + "x" + std::to_string(rec.n_tx) + " streams");
    if (p.size() != kBfeeHeaderBytes + len) corrupt("payload size disagrees with csi length");

    for (int i = 0; i < rec.n_rx; ++i) {
        rec.perm[i] = (rec.antenna_sel >> (2 * i)) & 0x3;
        if (rec.perm[i] >= rec.n_rx) corrupt("antenna permutation index out of range");
    }

    auto csi_bytes = p.subspan(kBfeeHeaderBytes, len);
    rec.csi = CsiPacket(rec.n_rx, rec.n_tx, kIntel5300Subcarriers,
                        static_cast<double>(rec.timestamp_low) * 1e-6);
    size_t bit = 0;
    for (int sc = 0; sc < kIntel5300Subcarriers; ++sc) {
        bit += 3;
        for (int j = 0; j < rec.n_tx * rec.n_rx; ++j) {
            int tx = j / rec.n_rx;
            int rx_stream = j % rec.n_rx;
            double re = read_i8_bits(csi_bytes, bit);
            double im = read_i8_bits(csi_bytes, bit + 8);
            bit += 16;
            rec.csi.at(rec.perm[rx_stream], tx, sc) = cplx(re, im);
        }
    }
    return rec;
}

} // namespace

std::vector<Intel5300Record> parse_intel5300(std::span<const uint8_t> bytes) {
    std::vector<Intel5300Record> records;
    size_t pos = 0;
    while (pos < bytes.size()) {
        if (pos + 3 > bytes.size())
            fail(Errc::data_format,
                 "truncated record header at byte offset " + std::to_string(pos));
        size_t field_len = static_cast<size_t>(bytes[pos]) << 8 | bytes[pos + 1];
        uint8_t code = bytes[pos + 2];
        if (field_len < 1)
            fail(Errc::data_format, "record length 0 at byte offset " + std::to_string(pos));
        if (pos + 2 + field_len > bytes.size())
            fail(Errc::data_format, "truncated record body at byte offset " + std::to_string(pos));
        auto payload = bytes.subspan(pos + 3, field_len - 1);
        if (code == kBfeeCode) records.push_back(decode_bfee(payload, pos));
        pos += 2 + field_len;
    }
    return records;
}

std::vector<Intel5300Record> parse_intel5300_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Errc::data_format, "cannot open capture file: " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return parse_intel5300(bytes);
}

CsiTrace intel5300_to_trace(const std::vector<Intel5300Record>& records, RadioConfig radio) {
    require(!records.empty(), Errc::invalid_input, "no decoded records");
    radio.n_rx = records.front().n_rx;
    radio.n_tx = records.front().n_tx;
    radio.n_sub = kIntel5300Subcarriers;
    CsiTrace trace;
    trace.config = radio;
    for (const auto& rec : records) {
        require(rec.n_rx == radio.n_rx && rec.n_tx == radio.n_tx, Errc::invalid_input,
                "records mix antenna configurations");
        trace.packets.push_back(rec.csi);
    }
    // NIC timestamps wrap; keep them monotone for downstream windows.
    for (size_t i = 1; i < trace.packets.size(); ++i)
        if (trace.packets[i].timestamp < trace.packets[i - 1].timestamp)
            trace.packets[i].timestamp = trace.packets[i - 1].timestamp;
    trace.validate();
    return trace;
}

} // namespace csiloc
