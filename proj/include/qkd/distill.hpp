#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qkd/security.hpp"

namespace qkd {

struct SiftedPair {
    std::uint32_t index = 0;
    Basis basis = Basis::X;
    double Y_A = 0.0;  // Alice's alpha-scaled estimate
    double Y_B = 0.0;  // Bob's outcome
};

// Keeps indices where both parties measured the same basis; Y_A is the
// alpha-scaled value. Exact-zero outcomes (no sign, no bit) are dropped here.
std::vector<SiftedPair> sift(const std::vector<QuadratureRecord>& alice,
                             const std::vector<QuadratureRecord>& bob, double V);

// How Bob's magnitude is recentred into the assessment frame.
//   Joint:    uses both signed outcomes (simulation-side statistics).
//   BobLocal: uses Bob's own sign as the estimate of Alice's, computable
//             from the announcement alone (what a live session can do).
enum class DecisionRule { Joint, BobLocal };

double bob_hat(const SiftedPair& pair, const SecurityContext& ctx, DecisionRule rule);

enum class PointClass : std::uint8_t { ErrorFree = 0, BitFlip = 1, Insecure = 2 };

struct SelectionResult {
    std::vector<std::uint32_t> kept;       // positions into the sifted vector
    std::vector<PointAssessment> points;   // one per sifted pair
    std::vector<PointClass> classes;       // one per sifted pair
};

// Keeps exactly the pairs with positive pointwise net rate under the chosen
// attack; classifies every pair for Fig.-2-style output.
SelectionResult postselect(const std::vector<SiftedPair>& pairs, const SecurityContext& ctx,
                           Attack attack, DecisionRule rule = DecisionRule::Joint);

struct BitPair {
    std::vector<std::uint8_t> alice;
    std::vector<std::uint8_t> bob;
};

// Phase basis: bit = 1 iff value > 0 on both sides. Amplitude basis: Alice
// bit = 1 iff value > 0, Bob bit = 1 iff value < 0 (anticorrelation flip).
BitPair encode_bits(const std::vector<SiftedPair>& kept_pairs);

// ---- Cascade ----------------------------------------------------------------
//
// 4 passes by default, initial block size k1 = ceil(0.73/qber_est), doubling
// each pass, seeded shuffles between passes, parity mismatches resolved by
// binary search with backtracking into earlier passes. Alice's string is the
// reference. Every disclosed parity counts toward leakage.

struct ParityRange {
    std::uint8_t pass = 0;
    std::uint32_t lo = 0;  // half-open range in the pass's permuted order
    std::uint32_t hi = 0;
};

// Alice's side: answers parity queries; needs only the shared seed (for the
// pass permutations) and her bits, not the block schedule.
class CascadeAlice {
  public:
    CascadeAlice(std::vector<std::uint8_t> bits, int passes, std::uint64_t seed);
    std::vector<std::uint8_t> parities(const std::vector<ParityRange>& ranges) const;
    std::size_t disclosed() const { return disclosed_; }

  private:
    std::vector<std::uint8_t> bits_;
    std::vector<std::vector<std::uint8_t>> prefix_;  // per pass: permuted parity prefix
    mutable std::size_t disclosed_ = 0;
};

// Bob's side: drives the protocol as a sequence of batched parity requests.
class CascadeBob {
  public:
    CascadeBob(std::vector<std::uint8_t> bits, double qber_est, int passes, std::uint64_t seed);

    // Next batch of ranges Bob needs from Alice; empty when reconciliation is
    // complete.
    std::vector<ParityRange> next_request();
    void feed(const std::vector<std::uint8_t>& parities);

    bool done() const { return done_; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }
    std::size_t leakage_bits() const { return leakage_; }
    std::size_t corrections() const { return corrections_; }

  private:
    struct Search {
        std::uint8_t pass;
        std::uint32_t block;
        std::uint32_t lo, hi;       // current interval; odd error count inside
        std::uint8_t alice_parity;  // Alice's parity of [lo, hi)
        bool alive;
    };

    std::uint8_t own_parity(int pass, std::uint32_t lo, std::uint32_t hi) const;
    void flip(std::uint32_t orig);
    void advance();

    std::vector<std::uint8_t> bits_;
    int passes_;
    std::vector<std::uint32_t> block_size_;                // per pass
    std::vector<std::vector<std::uint32_t>> perms_;        // per pass: permuted order
    std::vector<std::vector<std::uint32_t>> inv_perms_;
    std::vector<std::vector<std::uint8_t>> alice_parity_;  // per pass, per block (2 = unknown)
    std::vector<std::vector<std::uint8_t>> in_search_;     // per pass, per block
    std::vector<std::pair<std::uint8_t, std::uint32_t>> recheck_;  // (pass, block) queue
    std::vector<Search> active_;
    std::vector<ParityRange> pending_;  // ranges sent, awaiting parities
    bool pending_init_ = false;         // pending batch is a pass's block parities
    int init_pass_ = 0;                 // next pass whose block parities to request
    bool done_ = false;
    std::size_t leakage_ = 0;
    std::size_t corrections_ = 0;
};

struct CascadeResult {
    std::vector<std::uint8_t> corrected;  // Bob's bits after reconciliation
    std::size_t leakage_bits = 0;
    bool success = false;  // corrected == alice bits
    std::size_t corrections = 0;
};

CascadeResult cascade_reconcile(const std::vector<std::uint8_t>& alice_bits,
                                const std::vector<std::uint8_t>& bob_bits, double qber_est,
                                int passes, std::uint64_t seed);

// ---- privacy amplification ---------------------------------------------------

// m = floor(n*(1 - eve_bits_per_symbol) - leakage_bits - 2*log2(1/epsilon))
long pa_output_length(std::size_t n, double eve_bits_per_symbol, std::size_t leakage_bits,
                      double epsilon);

// Seeded Toeplitz hash over GF(2): output length m, T[i][j] = d[i - j + n - 1]
// with the diagonal d drawn from the seeded generator.
std::vector<std::uint8_t> toeplitz_hash(const std::vector<std::uint8_t>& bits, std::size_t m,
                                        std::uint64_t seed);

std::vector<std::uint8_t> privacy_amplify(const std::vector<std::uint8_t>& bits,
                                          double eve_bits_per_symbol, std::size_t leakage_bits,
                                          double epsilon, std::uint64_t seed);

// ---- stage accounting ---------------------------------------------------------

struct StageRow {
    std::string stage;
    double i_ab = 0.0;
    double eve_info = 0.0;
    double net = 0.0;              // i_ab - eve_info
    double retained_fraction = 0.0;
    double bits_per_symbol = 0.0;  // surviving bits per retained symbol
    double rate_kbps = 0.0;        // symbol_rate_kHz * retained_fraction * bits_per_symbol
};

struct StageInputs {
    EnsembleRates raw;              // quadrature ensemble numbers
    double ps_i_ab = 0.0;           // kept-region conditional means
    double ps_eve = 0.0;
    double ps_net = 0.0;
    double kept_over_sifted = 0.0;
    std::size_t n_kept = 0;
    std::size_t leakage_bits = 0;
    std::size_t final_len = 0;
    double symbol_rate_hz = 2e6;
    bool reconciled = false;        // reconciliation + PA rows present
};

// Four-row (raw / post-selection / reconciliation / privacy amplification)
// table. Retained fractions use the nominal 1/2 sifting factor; the raw row
// reports the full symbol rate.
std::vector<StageRow> stage_accounting(const StageInputs& in);

}  // namespace qkd
