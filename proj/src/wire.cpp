#include "qkd/wire.hpp"

#include <bit>
#include <cstring>

namespace qkd {

namespace {
constexpr std::size_t kHeader = 5;  // 4-byte length + 1-byte kind
constexpr std::uint32_t kMaxLen = 0xffffffffu;
}  // namespace

bool kind_defined(std::uint8_t code) { return code >= 0x01 && code <= 0x09; }

const char* kind_name(MsgKind kind) {
    switch (kind) {
        case MsgKind::BasisBatch: return "BASIS_BATCH";
        case MsgKind::SiftKeep: return "SIFT_KEEP";
        case MsgKind::AbsVals: return "ABS_VALS";
        case MsgKind::PsKeep: return "PS_KEEP";
        case MsgKind::CascadeParityReq: return "CASCADE_PARITY_REQ";
        case MsgKind::CascadeParityResp: return "CASCADE_PARITY_RESP";
        case MsgKind::PaSeed: return "PA_SEED";
        case MsgKind::KeyHash: return "KEY_HASH";
        case MsgKind::Abort: return "ABORT";
    }
    return "UNKNOWN";
}

std::vector<std::uint8_t> frame_encode(const Message& msg) {
    if (msg.payload.size() > static_cast<std::size_t>(kMaxLen) - 1)
        throw WireError("frame payload too large");
    const std::uint32_t len = static_cast<std::uint32_t>(msg.payload.size() + 1);
    std::vector<std::uint8_t> out;
    out.reserve(kHeader + msg.payload.size());
    out.push_back(static_cast<std::uint8_t>(len >> 24));
    out.push_back(static_cast<std::uint8_t>(len >> 16));
    out.push_back(static_cast<std::uint8_t>(len >> 8));
    out.push_back(static_cast<std::uint8_t>(len));
    out.push_back(static_cast<std::uint8_t>(msg.kind));
    out.insert(out.end(), msg.payload.begin(), msg.payload.end());
    return out;
}

bool frame_decode_stream(const std::vector<std::uint8_t>& buf, std::size_t& offset,
                         Message& out) {
    if (buf.size() - offset < kHeader - 1) return false;  // not even a length yet
    const std::size_t o = offset;
    const std::uint32_t len = (static_cast<std::uint32_t>(buf[o]) << 24) |
                              (static_cast<std::uint32_t>(buf[o + 1]) << 16) |
                              (static_cast<std::uint32_t>(buf[o + 2]) << 8) |
                              static_cast<std::uint32_t>(buf[o + 3]);
    if (len < 1) throw WireError("frame length must cover the kind byte");
    if (buf.size() - o - 4 < len) return false;  // frame incomplete
    const std::uint8_t code = buf[o + 4];
    if (!kind_defined(code)) throw WireError("unknown message kind");
    out.kind = static_cast<MsgKind>(code);
    out.payload.assign(buf.begin() + static_cast<std::ptrdiff_t>(o + kHeader),
                       buf.begin() + static_cast<std::ptrdiff_t>(o + 4 + len));
    offset = o + 4 + len;
    return true;
}

Message frame_decode(const std::vector<std::uint8_t>& bytes) {
    std::size_t offset = 0;
    Message msg;
    if (!frame_decode_stream(bytes, offset, msg)) throw WireError("truncated frame");
    if (offset != bytes.size()) throw WireError("frame length mismatch");
    return msg;
}

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32_be(const std::vector<std::uint8_t>& in, std::size_t& offset) {
    if (in.size() - offset < 4) throw WireError("payload truncated reading u32");
    std::uint32_t v = (static_cast<std::uint32_t>(in[offset]) << 24) |
                      (static_cast<std::uint32_t>(in[offset + 1]) << 16) |
                      (static_cast<std::uint32_t>(in[offset + 2]) << 8) |
                      static_cast<std::uint32_t>(in[offset + 3]);
    offset += 4;
    return v;
}

void put_u64_be(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint64_t get_u64_be(const std::vector<std::uint8_t>& in, std::size_t& offset) {
    if (in.size() - offset < 8) throw WireError("payload truncated reading u64");
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v = (v << 8) | in[offset + static_cast<std::size_t>(k)];
    offset += 8;
    return v;
}

void put_f64_be(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64_be(out, bits);
}

double get_f64_be(const std::vector<std::uint8_t>& in, std::size_t& offset) {
    const std::uint64_t bits = get_u64_be(in, offset);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace qkd
