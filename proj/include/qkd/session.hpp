#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qkd/config.hpp"
#include "qkd/distill.hpp"
#include "qkd/wire.hpp"

namespace qkd {

enum class Role { Alice, Bob };

enum class Phase {
    Measuring,
    Sifting,
    PostSelecting,
    Reconciling,
    Amplifying,
    Done,
    Aborted,
};

const char* phase_name(Phase phase);

// Which message kinds a party in a given phase may accept. ABORT is accepted
// in every non-terminal phase; terminal phases accept nothing.
bool message_allowed(Role receiver, Phase phase, MsgKind kind);

// Ordered, reliable, bidirectional byte stream endpoint.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual void send(const std::vector<std::uint8_t>& bytes) = 0;
    virtual std::vector<std::uint8_t> drain() = 0;  // all bytes available now
};

using TransportPair = std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>>;
TransportPair make_queue_pair();
TransportPair make_socket_pair();  // AF_UNIX stream socketpair, same framing

struct SessionHooks {
    // Flip Bob's first reconciled bit before privacy amplification; the
    // confirmation hashes must then mismatch and the session abort.
    bool flip_bit_after_reconcile = false;
};

struct PartyStats {
    std::size_t n_symbols = 0;
    std::size_t n_sifted = 0;
    std::size_t n_kept = 0;
    double qber_est = 0.0;     // Bob's kept-region error-probability mean
    double eve_bps = 0.0;      // Eve bound fed to privacy amplification
    std::size_t leakage_bits = 0;
    std::size_t corrections = 0;
    long key_bits = 0;
};

// One party as an explicit message-driven state machine.
class SessionMachine {
  public:
    SessionMachine(Role role, const RunConfig& cfg, std::vector<QuadratureRecord> records,
                   SessionHooks hooks = {});

    std::vector<Message> start();  // Alice's opening move; no-op for Bob
    std::vector<Message> on_message(const Message& msg);

    Role role() const { return role_; }
    Phase phase() const { return phase_; }
    const std::vector<std::uint8_t>& key() const { return key_; }
    const PartyStats& stats() const { return stats_; }
    const std::string& abort_reason() const { return abort_reason_; }

    void force_phase_for_test(Phase phase) { phase_ = phase; }

  private:
    std::vector<Message> abort(const std::string& reason);
    std::vector<Message> handle_basis_batch(const Message&);
    std::vector<Message> handle_sift_keep(const Message&);
    std::vector<Message> handle_abs_vals(const Message&);
    std::vector<Message> handle_ps_keep(const Message&);
    std::vector<Message> handle_parity_req(const Message&);
    std::vector<Message> handle_parity_resp(const Message&);
    std::vector<Message> handle_pa_seed(const Message&);
    std::vector<Message> handle_key_hash(const Message&);
    std::vector<Message> finish_reconciliation();

    Role role_;
    RunConfig cfg_;
    SecurityContext ctx_;
    std::vector<QuadratureRecord> records_;
    SessionHooks hooks_;
    Phase phase_ = Phase::Measuring;

    std::vector<std::uint32_t> sifted_idx_;   // symbol indices, ascending
    std::vector<double> own_vals_;            // own outcome per sifted index
    std::vector<Basis> sifted_basis_;
    std::vector<double> a_hats_;              // announced |Y_A|/sigma_A per sifted index
    std::vector<std::uint32_t> kept_pos_;     // positions into sifted order
    std::vector<std::uint8_t> bits_;
    std::unique_ptr<CascadeAlice> cascade_alice_;
    std::unique_ptr<CascadeBob> cascade_bob_;
    std::uint64_t pa_seed_ = 0;
    std::vector<std::uint8_t> key_;
    PartyStats stats_;
    std::string abort_reason_;
};

struct TranscriptStats {
    std::size_t bytes = 0;
    std::size_t frames = 0;
    std::size_t parity_bits = 0;           // Cascade parities disclosed
    std::size_t magnitudes_announced = 0;  // |Y_A| values made public
};

struct SessionResult {
    std::vector<std::uint8_t> alice_key;
    std::vector<std::uint8_t> bob_key;
    bool aborted = false;
    std::string abort_reason;
    PartyStats alice_stats;
    PartyStats bob_stats;
    TranscriptStats transcript_stats;
    std::vector<std::uint8_t> transcript;  // raw frames, delivery order
};

SessionResult run_session(const RunConfig& cfg, TransportKind transport,
                          SessionHooks hooks = {});

// Parses a raw-frame transcript and accounts for everything disclosed.
TranscriptStats transcript_leakage(const std::vector<std::uint8_t>& transcript);

}  // namespace qkd
