#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkd {

enum class MsgKind : std::uint8_t {
    BasisBatch = 0x01,
    SiftKeep = 0x02,
    AbsVals = 0x03,
    PsKeep = 0x04,
    CascadeParityReq = 0x05,
    CascadeParityResp = 0x06,
    PaSeed = 0x07,
    KeyHash = 0x08,
    Abort = 0x09,
};

bool kind_defined(std::uint8_t code);
const char* kind_name(MsgKind kind);

struct Message {
    MsgKind kind = MsgKind::Abort;
    std::vector<std::uint8_t> payload;

    bool operator==(const Message&) const = default;
};

struct WireError : std::runtime_error {
    explicit WireError(const std::string& what) : std::runtime_error(what) {}
};

// frame = 4-byte big-endian length (kind + payload) || 1-byte kind || payload
std::vector<std::uint8_t> frame_encode(const Message& msg);

// Strict one-shot decode: the buffer must hold exactly one well-formed frame.
Message frame_decode(const std::vector<std::uint8_t>& bytes);

// Incremental decode from a byte stream: consumes one frame starting at
// `offset` and advances it. Returns false when the buffer does not yet hold a
// complete frame (offset untouched); throws WireError on malformed input.
bool frame_decode_stream(const std::vector<std::uint8_t>& buf, std::size_t& offset, Message& out);

// big-endian scalar helpers
void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v);
std::uint32_t get_u32_be(const std::vector<std::uint8_t>& in, std::size_t& offset);
void put_u64_be(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint64_t get_u64_be(const std::vector<std::uint8_t>& in, std::size_t& offset);
void put_f64_be(std::vector<std::uint8_t>& out, double v);
double get_f64_be(const std::vector<std::uint8_t>& in, std::size_t& offset);

}  // namespace qkd
