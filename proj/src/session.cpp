#include "qkd/session.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <utility>

#include <fcntl.h>
#include <sys/socket.h>
#include <unistd.h>

namespace qkd {

namespace {

constexpr std::uint64_t kCascadeSeedTag = 0x63617363;  // shared permutation stream
constexpr std::uint64_t kPaSeedTag = 0x70617365;       // Alice's hashing seed
constexpr std::uint64_t kConfirmTag = 0x636f6e66;      // key-confirmation stream
constexpr std::size_t kConfirmBits = 128;

bool terminal(Phase p) { return p == Phase::Done || p == Phase::Aborted; }

std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& bits) {
    std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] & 1) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    return out;
}

std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t count,
                                      std::size_t& offset) {
    const std::size_t need = (count + 7) / 8;
    if (bytes.size() - offset < need) throw WireError("payload truncated reading bit block");
    std::vector<std::uint8_t> bits(count);
    for (std::size_t i = 0; i < count; ++i)
        bits[i] = (bytes[offset + i / 8] >> (i % 8)) & 1;
    offset += need;
    return bits;
}

void expect_consumed(const Message& msg, std::size_t offset) {
    if (offset != msg.payload.size()) throw WireError("payload has trailing bytes");
}

Message make_abort(const std::string& reason) {
    Message m;
    m.kind = MsgKind::Abort;
    m.payload.push_back(1);
    m.payload.insert(m.payload.end(), reason.begin(), reason.end());
    return m;
}

}  // namespace

const char* phase_name(Phase phase) {
    switch (phase) {
        case Phase::Measuring: return "measuring";
        case Phase::Sifting: return "sifting";
        case Phase::PostSelecting: return "post-selecting";
        case Phase::Reconciling: return "reconciling";
        case Phase::Amplifying: return "amplifying";
        case Phase::Done: return "done";
        case Phase::Aborted: return "aborted";
    }
    return "unknown";
}

bool message_allowed(Role receiver, Phase phase, MsgKind kind) {
    if (terminal(phase)) return false;
    if (kind == MsgKind::Abort) return true;
    if (receiver == Role::Alice) {
        switch (phase) {
            case Phase::Sifting: return kind == MsgKind::SiftKeep;
            case Phase::PostSelecting: return kind == MsgKind::PsKeep;
            case Phase::Reconciling: return kind == MsgKind::CascadeParityReq;
            case Phase::Amplifying: return kind == MsgKind::KeyHash;
            default: return false;
        }
    }
    switch (phase) {
        case Phase::Measuring: return kind == MsgKind::BasisBatch;
        case Phase::PostSelecting: return kind == MsgKind::AbsVals;
        case Phase::Reconciling: return kind == MsgKind::CascadeParityResp;
        case Phase::Amplifying: return kind == MsgKind::PaSeed || kind == MsgKind::KeyHash;
        default: return false;
    }
}

SessionMachine::SessionMachine(Role role, const RunConfig& cfg,
                               std::vector<QuadratureRecord> records, SessionHooks hooks)
    : role_(role), cfg_(cfg), ctx_(cfg.context()), records_(std::move(records)), hooks_(hooks) {
    stats_.n_symbols = records_.size();
}

std::vector<Message> SessionMachine::abort(const std::string& reason) {
    phase_ = Phase::Aborted;
    abort_reason_ = reason;
    key_.clear();
    return {make_abort(reason)};
}

std::vector<Message> SessionMachine::start() {
    if (role_ != Role::Alice || phase_ != Phase::Measuring) return {};
    const std::size_t n = records_.size();
    const std::size_t block = cfg_.timing().block_length();
    const std::size_t n_blocks = n ? (n + block - 1) / block : 0;
    std::vector<std::uint8_t> block_bits(n_blocks);
    for (std::size_t t = 0; t < n_blocks; ++t)
        block_bits[t] = records_[t * block].basis == Basis::Y ? 1 : 0;
    Message m;
    m.kind = MsgKind::BasisBatch;
    put_u32_be(m.payload, static_cast<std::uint32_t>(n_blocks));
    const auto packed = pack_bits(block_bits);
    m.payload.insert(m.payload.end(), packed.begin(), packed.end());
    phase_ = Phase::Sifting;
    return {m};
}

std::vector<Message> SessionMachine::handle_basis_batch(const Message& msg) {
    const std::size_t n = records_.size();
    const std::size_t block = cfg_.timing().block_length();
    const std::size_t n_blocks = n ? (n + block - 1) / block : 0;
    std::size_t off = 0;
    const std::uint32_t count = get_u32_be(msg.payload, off);
    if (count != n_blocks) return abort("basis batch does not match run length");
    const auto block_bits = unpack_bits(msg.payload, count, off);
    expect_consumed(msg, off);

    for (std::size_t i = 0; i < n; ++i) {
        const Basis alice_basis = block_bits[i / block] ? Basis::Y : Basis::X;
        if (records_[i].basis != alice_basis) continue;
        if (records_[i].bob_value == 0.0) continue;  // no sign, no bit
        sifted_idx_.push_back(records_[i].index);
        own_vals_.push_back(records_[i].bob_value);
        sifted_basis_.push_back(records_[i].basis);
    }
    stats_.n_sifted = sifted_idx_.size();

    Message out;
    out.kind = MsgKind::SiftKeep;
    put_u32_be(out.payload, static_cast<std::uint32_t>(sifted_idx_.size()));
    for (const std::uint32_t idx : sifted_idx_) put_u32_be(out.payload, idx);
    phase_ = Phase::PostSelecting;
    return {out};
}

std::vector<Message> SessionMachine::handle_sift_keep(const Message& msg) {
    std::size_t off = 0;
    const std::uint32_t count = get_u32_be(msg.payload, off);
    sifted_idx_.reserve(count);
    std::uint32_t prev = 0;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t idx = get_u32_be(msg.payload, off);
        if (idx >= records_.size() || (k > 0 && idx <= prev))
            return abort("sift indices not strictly ascending in range");
        prev = idx;
        sifted_idx_.push_back(idx);
        own_vals_.push_back(records_[idx].alice_value);
        sifted_basis_.push_back(records_[idx].basis);
    }
    expect_consumed(msg, off);
    stats_.n_sifted = sifted_idx_.size();

    const double V = ctx_.V;
    const double sig = sigma_alice(V);
    Message out;
    out.kind = MsgKind::AbsVals;
    put_u32_be(out.payload, static_cast<std::uint32_t>(sifted_idx_.size()));
    a_hats_.reserve(sifted_idx_.size());
    for (const double y_a : own_vals_) {
        const double mag = std::abs(alice_estimate(y_a, V));
        a_hats_.push_back(mag / sig);
        put_f64_be(out.payload, mag);
    }
    phase_ = Phase::PostSelecting;
    return {out};
}

std::vector<Message> SessionMachine::handle_abs_vals(const Message& msg) {
    std::size_t off = 0;
    const std::uint32_t count = get_u32_be(msg.payload, off);
    if (count != sifted_idx_.size()) return abort("announced magnitudes do not match sift");
    const double sig = sigma_alice(ctx_.V);
    const double sqrt_eta = std::sqrt(ctx_.eta);
    a_hats_.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        const double mag = get_f64_be(msg.payload, off);
        if (!(mag >= 0.0) || !std::isfinite(mag)) return abort("announced magnitude invalid");
        a_hats_.push_back(mag / sig);
    }
    expect_consumed(msg, off);

    double qber_sum = 0.0, eve_sum = 0.0, eve_max = 0.0;
    for (std::uint32_t k = 0; k < count; ++k) {
        const double y_b = own_vals_[k];
        const double s = y_b >= 0.0 ? 1.0 : -1.0;
        const double b_hat = std::abs(y_b - s * sqrt_eta * (sig - 1.0) * a_hats_[k]);
        const PointAssessment pa = frame_assess(a_hats_[k], b_hat, ctx_);
        const bool keep = !cfg_.post_selection || pa.net(cfg_.attack) > 0.0;
        if (!keep) continue;
        kept_pos_.push_back(k);
        qber_sum += pa.p;
        const double ev = cfg_.attack == Attack::Collective ? pa.chi : pa.i_ae;
        eve_sum += ev;
        eve_max = std::max(eve_max, ev);
    }
    stats_.n_kept = kept_pos_.size();
    if (!kept_pos_.empty()) {
        stats_.qber_est = qber_sum / static_cast<double>(kept_pos_.size());
        stats_.eve_bps = cfg_.eve_bound == EveBound::Max
                             ? eve_max
                             : eve_sum / static_cast<double>(kept_pos_.size());
    }

    bits_.reserve(kept_pos_.size());
    for (const std::uint32_t k : kept_pos_) {
        const double y_b = own_vals_[k];
        bits_.push_back(sifted_basis_[k] == Basis::Y ? (y_b > 0.0 ? 1 : 0)
                                                     : (y_b < 0.0 ? 1 : 0));
    }

    Message keep_msg;
    keep_msg.kind = MsgKind::PsKeep;
    put_u32_be(keep_msg.payload, static_cast<std::uint32_t>(kept_pos_.size()));
    for (const std::uint32_t k : kept_pos_) put_u32_be(keep_msg.payload, sifted_idx_[k]);

    phase_ = Phase::Reconciling;
    std::vector<Message> out{keep_msg};
    if (bits_.empty()) {
        Message req;
        req.kind = MsgKind::CascadeParityReq;
        put_u32_be(req.payload, 0);
        out.push_back(req);
        phase_ = Phase::Amplifying;
        return out;
    }

    const double q = std::clamp(stats_.qber_est, 1e-4, 0.2499);
    cascade_bob_ = std::make_unique<CascadeBob>(bits_, q, cfg_.cascade_passes,
                                                derive_seed(cfg_.seed, kCascadeSeedTag));
    auto ranges = cascade_bob_->next_request();
    if (ranges.empty()) {
        const auto tail = finish_reconciliation();
        out.insert(out.end(), tail.begin(), tail.end());
        return out;
    }
    Message req;
    req.kind = MsgKind::CascadeParityReq;
    put_u32_be(req.payload, static_cast<std::uint32_t>(ranges.size()));
    for (const ParityRange& r : ranges) {
        req.payload.push_back(r.pass);
        put_u32_be(req.payload, r.lo);
        put_u32_be(req.payload, r.hi);
    }
    out.push_back(req);
    return out;
}

std::vector<Message> SessionMachine::handle_ps_keep(const Message& msg) {
    std::size_t off = 0;
    const std::uint32_t count = get_u32_be(msg.payload, off);
    if (count > sifted_idx_.size()) return abort("post-selection keeps more than sifted");
    std::size_t cursor = 0;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t idx = get_u32_be(msg.payload, off);
        while (cursor < sifted_idx_.size() && sifted_idx_[cursor] < idx) ++cursor;
        if (cursor >= sifted_idx_.size() || sifted_idx_[cursor] != idx)
            return abort("kept index was never sifted");
        kept_pos_.push_back(static_cast<std::uint32_t>(cursor));
        ++cursor;
    }
    expect_consumed(msg, off);
    stats_.n_kept = kept_pos_.size();

    double eve_sum = 0.0, eve_max = 0.0;
    bits_.reserve(kept_pos_.size());
    for (const std::uint32_t k : kept_pos_) {
        const double ev = eve_bound(frame_overlap(a_hats_[k], ctx_), cfg_.attack);
        eve_sum += ev;
        eve_max = std::max(eve_max, ev);
        bits_.push_back(own_vals_[k] > 0.0 ? 1 : 0);  // Alice: value > 0 in both bases
    }
    if (!kept_pos_.empty())
        stats_.eve_bps = cfg_.eve_bound == EveBound::Max
                             ? eve_max
                             : eve_sum / static_cast<double>(kept_pos_.size());
    if (!bits_.empty())
        cascade_alice_ = std::make_unique<CascadeAlice>(bits_, cfg_.cascade_passes,
                                                        derive_seed(cfg_.seed, kCascadeSeedTag));
    phase_ = Phase::Reconciling;
    return {};
}

std::vector<Message> SessionMachine::handle_parity_req(const Message& msg) {
    std::size_t off = 0;
    const std::uint32_t count = get_u32_be(msg.payload, off);
    if (count == 0) {
        expect_consumed(msg, off);
        // reconciliation complete: derive the key and open confirmation
        stats_.leakage_bits = cascade_alice_ ? cascade_alice_->disclosed() : 0;
        const long m = pa_output_length(bits_.size(), stats_.eve_bps, stats_.leakage_bits,
                                        cfg_.epsilon_pa);
        pa_seed_ = derive_seed(cfg_.seed, kPaSeedTag);
        key_ = m > 0 ? toeplitz_hash(bits_, static_cast<std::size_t>(m), pa_seed_)
                     : std::vector<std::uint8_t>{};
        stats_.key_bits = static_cast<long>(key_.size());

        Message seed_msg;
        seed_msg.kind = MsgKind::PaSeed;
        put_u64_be(seed_msg.payload, pa_seed_);

        Message hash_msg;
        hash_msg.kind = MsgKind::KeyHash;
        put_u32_be(hash_msg.payload, static_cast<std::uint32_t>(key_.size()));
        const auto h = toeplitz_hash(key_, kConfirmBits, derive_seed(pa_seed_, kConfirmTag));
        const auto packed = pack_bits(h);
        hash_msg.payload.insert(hash_msg.payload.end(), packed.begin(), packed.end());

        phase_ = Phase::Amplifying;
        return {seed_msg, hash_msg};
    }
    if (!cascade_alice_) return abort("parity request without reconciliation data");
    std::vector<ParityRange> ranges;
    ranges.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        if (msg.payload.size() - off < 9) return abort("parity request truncated");
        ParityRange r;
        r.pass = msg.payload[off++];
        r.lo = get_u32_be(msg.payload, off);
        r.hi = get_u32_be(msg.payload, off);
        if (r.pass >= cfg_.cascade_passes || r.lo > r.hi || r.hi > bits_.size())
            return abort("parity range out of bounds");
        ranges.push_back(r);
    }
    expect_consumed(msg, off);
    const auto pars = cascade_alice_->parities(ranges);
    stats_.leakage_bits = cascade_alice_->disclosed();
    Message resp;
    resp.kind = MsgKind::CascadeParityResp;
    put_u32_be(resp.payload, count);
    const auto packed = pack_bits(pars);
    resp.payload.insert(resp.payload.end(), packed.begin(), packed.end());
    return {resp};
}

std::vector<Message> SessionMachine::finish_reconciliation() {
    bits_ = cascade_bob_->bits();
    stats_.leakage_bits = cascade_bob_->leakage_bits();
    stats_.corrections = cascade_bob_->corrections();
    if (hooks_.flip_bit_after_reconcile && !bits_.empty()) bits_[0] ^= 1;
    phase_ = Phase::Amplifying;
    Message req;
    req.kind = MsgKind::CascadeParityReq;
    put_u32_be(req.payload, 0);
    return {req};
}

std::vector<Message> SessionMachine::handle_parity_resp(const Message& msg) {
    if (!cascade_bob_) return abort("parity response without reconciliation data");
    std::size_t off = 0;
    const std::uint32_t count = get_u32_be(msg.payload, off);
    const auto pars = unpack_bits(msg.payload, count, off);
    expect_consumed(msg, off);
    cascade_bob_->feed(pars);
    const auto ranges = cascade_bob_->next_request();
    if (ranges.empty()) return finish_reconciliation();
    Message req;
    req.kind = MsgKind::CascadeParityReq;
    put_u32_be(req.payload, static_cast<std::uint32_t>(ranges.size()));
    for (const ParityRange& r : ranges) {
        req.payload.push_back(r.pass);
        put_u32_be(req.payload, r.lo);
        put_u32_be(req.payload, r.hi);
    }
    return {req};
}

std::vector<Message> SessionMachine::handle_pa_seed(const Message& msg) {
    std::size_t off = 0;
    pa_seed_ = get_u64_be(msg.payload, off);
    expect_consumed(msg, off);
    if (role_ != Role::Bob) return abort("unexpected PA seed");
    if (stats_.leakage_bits == 0 && cascade_bob_) stats_.leakage_bits = cascade_bob_->leakage_bits();
    const long m =
        pa_output_length(bits_.size(), stats_.eve_bps, stats_.leakage_bits, cfg_.epsilon_pa);
    key_ = m > 0 ? toeplitz_hash(bits_, static_cast<std::size_t>(m), pa_seed_)
                 : std::vector<std::uint8_t>{};
    stats_.key_bits = static_cast<long>(key_.size());
    return {};
}

std::vector<Message> SessionMachine::handle_key_hash(const Message& msg) {
    std::size_t off = 0;
    const std::uint32_t peer_len = get_u32_be(msg.payload, off);
    const auto peer_hash = unpack_bits(msg.payload, kConfirmBits, off);
    expect_consumed(msg, off);
    if (peer_len != key_.size()) return abort("key length mismatch");
    const auto mine = toeplitz_hash(key_, kConfirmBits, derive_seed(pa_seed_, kConfirmTag));
    if (mine != peer_hash) return abort("key confirmation failed");
    if (role_ == Role::Alice) {
        phase_ = Phase::Done;
        return {};
    }
    Message reply;
    reply.kind = MsgKind::KeyHash;
    put_u32_be(reply.payload, static_cast<std::uint32_t>(key_.size()));
    const auto packed = pack_bits(mine);
    reply.payload.insert(reply.payload.end(), packed.begin(), packed.end());
    phase_ = Phase::Done;
    return {reply};
}

std::vector<Message> SessionMachine::on_message(const Message& msg) {
    if (terminal(phase_)) return {};
    if (!message_allowed(role_, phase_, msg.kind))
        return abort(std::string("message ") + kind_name(msg.kind) + " not allowed in phase " +
                     phase_name(phase_));
    if (msg.kind == MsgKind::Abort) {
        phase_ = Phase::Aborted;
        key_.clear();
        abort_reason_ = msg.payload.size() > 1
                            ? std::string(msg.payload.begin() + 1, msg.payload.end())
                            : "peer aborted";
        return {};
    }
    try {
        switch (msg.kind) {
            case MsgKind::BasisBatch: return handle_basis_batch(msg);
            case MsgKind::SiftKeep: return handle_sift_keep(msg);
            case MsgKind::AbsVals: return handle_abs_vals(msg);
            case MsgKind::PsKeep: return handle_ps_keep(msg);
            case MsgKind::CascadeParityReq: return handle_parity_req(msg);
            case MsgKind::CascadeParityResp: return handle_parity_resp(msg);
            case MsgKind::PaSeed: return handle_pa_seed(msg);
            case MsgKind::KeyHash: return handle_key_hash(msg);
            default: return abort("unhandled message kind");
        }
    } catch (const std::exception& e) {
        return abort(std::string("protocol failure: ") + e.what());
    }
}

// ---- transports ---------------------------------------------------------------

namespace {

struct SharedBuf {
    std::vector<std::uint8_t> data;
};

class QueueTransport final : public Transport {
  public:
    QueueTransport(std::shared_ptr<SharedBuf> out, std::shared_ptr<SharedBuf> in)
        : out_(std::move(out)), in_(std::move(in)) {}

    void send(const std::vector<std::uint8_t>& bytes) override {
        out_->data.insert(out_->data.end(), bytes.begin(), bytes.end());
    }

    std::vector<std::uint8_t> drain() override { return std::exchange(in_->data, {}); }

  private:
    std::shared_ptr<SharedBuf> out_, in_;
};

class SocketTransport final : public Transport {
  public:
    explicit SocketTransport(int fd) : fd_(fd) {}
    ~SocketTransport() override { ::close(fd_); }

    void set_peer(SocketTransport* peer) { peer_ = peer; }

    void send(const std::vector<std::uint8_t>& bytes) override {
        std::size_t off = 0;
        int idle = 0;
        while (off < bytes.size()) {
            const ssize_t k = ::write(fd_, bytes.data() + off, bytes.size() - off);
            if (k > 0) {
                off += static_cast<std::size_t>(k);
                idle = 0;
                continue;
            }
            if (k < 0 && (errno == EAGAIN || errno == EWOULDBLOCK) && peer_) {
                // single-process pair: stage the peer's inbound bytes to free
                // kernel buffer space
                if (peer_->pull() == 0 && ++idle > 1000)
                    throw std::runtime_error("socket transport stalled");
                continue;
            }
            throw std::runtime_error(std::string("socket write failed: ") + std::strerror(errno));
        }
    }

    std::vector<std::uint8_t> drain() override {
        pull();
        return std::exchange(staged_, {});
    }

  private:
    std::size_t pull() {
        std::uint8_t tmp[65536];
        std::size_t got = 0;
        for (;;) {
            const ssize_t k = ::read(fd_, tmp, sizeof tmp);
            if (k <= 0) break;
            staged_.insert(staged_.end(), tmp, tmp + k);
            got += static_cast<std::size_t>(k);
        }
        return got;
    }

    int fd_;
    SocketTransport* peer_ = nullptr;
    std::vector<std::uint8_t> staged_;
};

}  // namespace

TransportPair make_queue_pair() {
    auto ab = std::make_shared<SharedBuf>();
    auto ba = std::make_shared<SharedBuf>();
    return {std::make_unique<QueueTransport>(ab, ba), std::make_unique<QueueTransport>(ba, ab)};
}

TransportPair make_socket_pair() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0)
        throw std::runtime_error("socketpair failed");
    for (const int fd : fds) {
        const int flags = ::fcntl(fd, F_GETFL, 0);
        ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    }
    auto a = std::make_unique<SocketTransport>(fds[0]);
    auto b = std::make_unique<SocketTransport>(fds[1]);
    a->set_peer(b.get());
    b->set_peer(a.get());
    return {std::move(a), std::move(b)};
}

// ---- driver ---------------------------------------------------------------------

SessionResult run_session(const RunConfig& cfg, TransportKind transport, SessionHooks hooks) {
    RunRecords rr = simulate_measurements(cfg.source(), cfg.channel(), cfg.timing(),
                                          cfg.n_symbols, cfg.seed);
    SessionMachine alice(Role::Alice, cfg, std::move(rr.alice));
    SessionMachine bob(Role::Bob, cfg, std::move(rr.bob), hooks);
    auto [ta, tb] = transport == TransportKind::Queue ? make_queue_pair() : make_socket_pair();

    std::vector<std::uint8_t> transcript;
    const auto send_all = [](Transport& t, const std::vector<Message>& msgs) {
        for (const Message& m : msgs) t.send(frame_encode(m));
    };

    // deliver every complete frame waiting for `machine`, via its endpoint
    std::vector<std::uint8_t> abuf, bbuf;
    std::size_t aoff = 0, boff = 0;
    const auto deliver = [&](SessionMachine& machine, Transport& endpoint,
                             std::vector<std::uint8_t>& buf, std::size_t& off) {
        const auto in = endpoint.drain();
        buf.insert(buf.end(), in.begin(), in.end());
        bool progressed = false;
        Message msg;
        for (;;) {
            const std::size_t frame_start = off;
            if (!frame_decode_stream(buf, off, msg)) break;
            transcript.insert(transcript.end(), buf.begin() + static_cast<std::ptrdiff_t>(frame_start),
                              buf.begin() + static_cast<std::ptrdiff_t>(off));
            send_all(endpoint, machine.on_message(msg));
            progressed = true;
        }
        return progressed;
    };

    SessionResult res;
    try {
        send_all(*ta, alice.start());
        bool progress = true;
        while (progress && !(terminal(alice.phase()) && terminal(bob.phase()))) {
            progress = false;
            if (deliver(bob, *tb, bbuf, boff)) progress = true;
            if (deliver(alice, *ta, abuf, aoff)) progress = true;
        }
        if (!terminal(alice.phase()) || !terminal(bob.phase())) {
            res.aborted = true;
            res.abort_reason = "session stalled without reaching a terminal phase";
        }
    } catch (const std::exception& e) {
        res.aborted = true;
        res.abort_reason = std::string("transport failure: ") + e.what();
    }

    res.aborted = res.aborted || alice.phase() == Phase::Aborted || bob.phase() == Phase::Aborted;
    if (res.abort_reason.empty())
        res.abort_reason = !alice.abort_reason().empty() ? alice.abort_reason()
                                                         : bob.abort_reason();
    if (!res.aborted) {
        res.alice_key = alice.key();
        res.bob_key = bob.key();
    }
    res.alice_stats = alice.stats();
    res.bob_stats = bob.stats();
    res.transcript = std::move(transcript);
    res.transcript_stats = transcript_leakage(res.transcript);
    return res;
}

TranscriptStats transcript_leakage(const std::vector<std::uint8_t>& transcript) {
    TranscriptStats stats;
    stats.bytes = transcript.size();
    std::size_t off = 0;
    Message msg;
    while (off < transcript.size()) {
        if (!frame_decode_stream(transcript, off, msg))
            throw WireError("transcript ends mid-frame");
        ++stats.frames;
        std::size_t p = 0;
        if (msg.kind == MsgKind::CascadeParityResp)
            stats.parity_bits += get_u32_be(msg.payload, p);
        else if (msg.kind == MsgKind::AbsVals)
            stats.magnitudes_announced += get_u32_be(msg.payload, p);
    }
    return stats;
}

}  // namespace qkd
