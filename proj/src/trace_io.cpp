#include "csiloc/trace_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "csiloc/errors.hpp"

namespace csiloc {

namespace {

class Writer {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) {
        buf_.push_back(static_cast<uint8_t>(v & 0xFF));
        buf_.push_back(static_cast<uint8_t>(v >> 8));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
    }
    void f32(float v) {
        uint32_t bits = std::bit_cast<uint32_t>(v);
        u32(bits);
    }
    void f64(double v) {
        uint64_t bits = std::bit_cast<uint64_t>(v);
        u64(bits);
    }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    std::vector<uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    size_t offset() const { return pos_; }

    void need(size_t n, const char* what) const {
        if (pos_ + n > bytes_.size())
            fail(Errc::data_format, std::string("truncated trace: expected ") + what +
                                        " at byte offset " + std::to_string(pos_));
    }
    uint8_t u8(const char* what) {
        need(1, what);
        return bytes_[pos_++];
    }
    uint16_t u16(const char* what) {
        need(2, what);
        uint16_t v = static_cast<uint16_t>(bytes_[pos_]) |
                     static_cast<uint16_t>(bytes_[pos_ + 1]) << 8;
        pos_ += 2;
        return v;
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    uint64_t u64(const char* what) {
        need(8, what);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    std::span<const uint8_t> bytes_;
    size_t pos_ = 0;
};

} // namespace

std::vector<uint8_t> serialize_trace(const CsiTrace& trace) {
    trace.validate();
    require(trace.packets.size() <= 0xFFFFFFFFull, Errc::invalid_input, "too many packets");
    Writer w;
    w.u8('C');
    w.u8('S');
    w.u8('I');
    w.u8('T');
    w.u16(kTraceFormatVersion);
    w.u8(static_cast<uint8_t>(trace.config.n_rx));
    w.u8(static_cast<uint8_t>(trace.config.n_tx));
    w.u16(static_cast<uint16_t>(trace.config.n_sub));
    w.u32(static_cast<uint32_t>(trace.packets.size()));
    w.f64(trace.config.f_c);
    w.f64(trace.config.f_delta);
    w.f64(trace.config.d);
    for (const auto& p : trace.packets) {
        w.f64(p.timestamp);
        for (const auto& v : p.h) {
            w.f32(static_cast<float>(v.real()));
            w.f32(static_cast<float>(v.imag()));
        }
    }
    return w.take();
}

CsiTrace deserialize_trace(std::span<const uint8_t> bytes) {
    Reader r(bytes);
    char magic[4];
    for (char& m : magic) m = static_cast<char>(r.u8("magic"));
    if (std::memcmp(magic, "CSIT", 4) != 0)
        fail(Errc::data_format, "bad magic at byte offset 0 (not a trace file)");
    uint16_t version = r.u16("version");
    if (version != kTraceFormatVersion)
        fail(Errc::data_format,
             "unsupported trace version " + std::to_string(version) + " at byte offset 4");

    CsiTrace trace;
    trace.config.n_rx = r.u8("n_rx");
    trace.config.n_tx = r.u8("n_tx");
    trace.config.n_sub = r.u16("n_sub");
    uint32_t n_packets = r.u32("n_packets");
    trace.config.f_c = r.f64("f_c");
    trace.config.f_delta = r.f64("f_delta");
    trace.config.d = r.f64("d");
    trace.config.c = kSpeedOfLight;
    trace.config.validate();

    trace.packets.reserve(n_packets);
    for (uint32_t n = 0; n < n_packets; ++n) {
        CsiPacket p(trace.config.n_rx, trace.config.n_tx, trace.config.n_sub);
        p.timestamp = r.f64("packet timestamp");
        const size_t count = p.h.size();
        r.need(count * 8, "packet payload");
        for (size_t i = 0; i < count; ++i) {
            float re = r.f32("re");
            float im = r.f32("im");
            p.h[i] = cplx(re, im);
        }
        trace.packets.push_back(std::move(p));
    }
    if (!r.at_end())
        fail(Errc::data_format, "trailing bytes at byte offset " + std::to_string(r.offset()));
    trace.validate();
    return trace;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), Errc::invalid_input, "cannot open for writing: " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        require(out.good(), Errc::invalid_input, "write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path,
                      std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

void save_trace(const CsiTrace& trace, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_trace(trace));
}

CsiTrace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Errc::data_format, "cannot open trace file: " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return deserialize_trace(bytes);
}

} // namespace csiloc
