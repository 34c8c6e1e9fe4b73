#include "qkd/distill.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qkd/rng.hpp"

namespace qkd {

namespace {

constexpr std::uint64_t kCascadePermTag = 0xca5cade0;

std::vector<std::uint32_t> make_perm(std::size_t n, int pass, std::uint64_t seed) {
    std::vector<std::uint32_t> p(n);
    std::iota(p.begin(), p.end(), 0u);
    if (pass > 0) {  // pass 0 keeps the natural order
        Rng rng(derive_seed(seed, kCascadePermTag + static_cast<std::uint64_t>(pass)));
        rng.shuffle(p);
    }
    return p;
}

}  // namespace

std::vector<SiftedPair> sift(const std::vector<QuadratureRecord>& alice,
                             const std::vector<QuadratureRecord>& bob, double V) {
    if (alice.size() != bob.size())
        throw std::invalid_argument("sift: record sequences differ in length");
    std::vector<SiftedPair> out;
    for (std::size_t i = 0; i < alice.size(); ++i) {
        if (alice[i].index != bob[i].index)
            throw std::invalid_argument("sift: record sequences are misaligned");
        if (alice[i].basis != bob[i].basis) continue;
        // exact zeros carry no sign, hence no bit
        if (alice[i].alice_value == 0.0 || bob[i].bob_value == 0.0) continue;
        SiftedPair p;
        p.index = alice[i].index;
        p.basis = alice[i].basis;
        p.Y_A = alice_estimate(alice[i].alice_value, V);
        p.Y_B = bob[i].bob_value;
        out.push_back(p);
    }
    return out;
}

double bob_hat(const SiftedPair& pair, const SecurityContext& ctx, DecisionRule rule) {
    const double sig = sigma_alice(ctx.V);
    const double sqrt_eta = std::sqrt(ctx.eta);
    if (rule == DecisionRule::Joint) {
        // conditional mean of Y_B is +sqrt(eta)*Y_A in the phase basis and
        // -sqrt(eta)*Y_A in the (anticorrelated) amplitude basis
        const double corr = pair.basis == Basis::Y ? 1.0 : -1.0;
        return std::abs(pair.Y_B - corr * sqrt_eta * pair.Y_A * (1.0 - 1.0 / sig));
    }
    const double a_hat = std::abs(pair.Y_A) / sig;
    const double s = pair.Y_B >= 0.0 ? 1.0 : -1.0;
    return std::abs(pair.Y_B - s * sqrt_eta * (sig - 1.0) * a_hat);
}

SelectionResult postselect(const std::vector<SiftedPair>& pairs, const SecurityContext& ctx,
                           Attack attack, DecisionRule rule) {
    const double sig = sigma_alice(ctx.V);
    SelectionResult sel;
    sel.points.reserve(pairs.size());
    sel.classes.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const SiftedPair& pr = pairs[i];
        const double a_hat = std::abs(pr.Y_A) / sig;
        const PointAssessment pa = frame_assess(a_hat, bob_hat(pr, ctx, rule), ctx);
        sel.points.push_back(pa);
        if (pa.net(attack) > 0.0) {
            sel.kept.push_back(static_cast<std::uint32_t>(i));
            bool alice_bit, bob_bit;
            if (pr.basis == Basis::Y) {
                alice_bit = pr.Y_A > 0.0;
                bob_bit = pr.Y_B > 0.0;
            } else {
                alice_bit = pr.Y_A > 0.0;
                bob_bit = pr.Y_B < 0.0;
            }
            sel.classes.push_back(alice_bit == bob_bit ? PointClass::ErrorFree
                                                       : PointClass::BitFlip);
        } else {
            sel.classes.push_back(PointClass::Insecure);
        }
    }
    return sel;
}

BitPair encode_bits(const std::vector<SiftedPair>& kept_pairs) {
    BitPair bp;
    bp.alice.reserve(kept_pairs.size());
    bp.bob.reserve(kept_pairs.size());
    for (const SiftedPair& pr : kept_pairs) {
        if (pr.Y_A == 0.0 || pr.Y_B == 0.0)
            throw std::logic_error("encode_bits: exact zero must be filtered upstream");
        if (pr.basis == Basis::Y) {
            bp.alice.push_back(pr.Y_A > 0.0 ? 1 : 0);
            bp.bob.push_back(pr.Y_B > 0.0 ? 1 : 0);
        } else {
            // amplitude anticorrelation flip on Bob's side
            bp.alice.push_back(pr.Y_A > 0.0 ? 1 : 0);
            bp.bob.push_back(pr.Y_B < 0.0 ? 1 : 0);
        }
    }
    return bp;
}

// ---- Cascade ----------------------------------------------------------------

CascadeAlice::CascadeAlice(std::vector<std::uint8_t> bits, int passes, std::uint64_t seed)
    : bits_(std::move(bits)) {
    if (passes < 1) throw std::domain_error("cascade needs at least one pass");
    const std::size_t n = bits_.size();
    prefix_.resize(passes);
    for (int p = 0; p < passes; ++p) {
        const auto perm = make_perm(n, p, seed);
        prefix_[p].resize(n + 1);
        prefix_[p][0] = 0;
        for (std::size_t k = 0; k < n; ++k)
            prefix_[p][k + 1] = prefix_[p][k] ^ (bits_[perm[k]] & 1);
    }
}

std::vector<std::uint8_t> CascadeAlice::parities(const std::vector<ParityRange>& ranges) const {
    std::vector<std::uint8_t> out;
    out.reserve(ranges.size());
    for (const ParityRange& r : ranges) {
        if (r.pass >= prefix_.size() || r.lo > r.hi || r.hi > bits_.size())
            throw std::out_of_range("cascade: parity range out of bounds");
        out.push_back(prefix_[r.pass][r.hi] ^ prefix_[r.pass][r.lo]);
    }
    disclosed_ += ranges.size();
    return out;
}

CascadeBob::CascadeBob(std::vector<std::uint8_t> bits, double qber_est, int passes,
                       std::uint64_t seed)
    : bits_(std::move(bits)), passes_(passes) {
    if (passes < 1) throw std::domain_error("cascade needs at least one pass");
    if (!(qber_est > 0.0 && qber_est < 0.25))
        throw std::domain_error("cascade: qber estimate outside (0, 0.25)");
    const std::size_t n = bits_.size();
    if (n == 0) {
        done_ = true;
        return;
    }
    std::uint64_t k1 = static_cast<std::uint64_t>(std::ceil(0.73 / qber_est));
    if (k1 < 1) k1 = 1;
    block_size_.resize(passes);
    perms_.resize(passes);
    inv_perms_.resize(passes);
    alice_parity_.resize(passes);
    in_search_.resize(passes);
    for (int p = 0; p < passes; ++p) {
        std::uint64_t k = k1 << p;  // doubling schedule
        if (k > n) k = n;
        block_size_[p] = static_cast<std::uint32_t>(k);
        perms_[p] = make_perm(n, p, seed);
        inv_perms_[p].resize(n);
        for (std::uint32_t t = 0; t < n; ++t) inv_perms_[p][perms_[p][t]] = t;
        const std::size_t nb = (n + k - 1) / k;
        alice_parity_[p].assign(nb, 2);  // unknown
        in_search_[p].assign(nb, 0);
    }
}

std::uint8_t CascadeBob::own_parity(int pass, std::uint32_t lo, std::uint32_t hi) const {
    std::uint8_t par = 0;
    for (std::uint32_t t = lo; t < hi; ++t) par ^= bits_[perms_[pass][t]] & 1;
    return par;
}

void CascadeBob::flip(std::uint32_t orig) {
    bits_[orig] ^= 1;
    ++corrections_;
    for (int p = 0; p < init_pass_; ++p) {
        const std::uint32_t pp = inv_perms_[p][orig];
        const std::uint32_t b = pp / block_size_[p];
        // a live search whose interval absorbed the flip may have lost its
        // odd-error invariant; cancel it and let a recheck decide
        for (Search& s : active_) {
            if (s.alive && s.pass == p && s.block == b && pp >= s.lo && pp < s.hi &&
                own_parity(s.pass, s.lo, s.hi) == s.alice_parity) {
                s.alive = false;
                in_search_[s.pass][s.block] = 0;
                recheck_.emplace_back(s.pass, s.block);
            }
        }
        if (!in_search_[p][b]) recheck_.emplace_back(static_cast<std::uint8_t>(p), b);
    }
}

void CascadeBob::advance() {
    const std::uint32_t n = static_cast<std::uint32_t>(bits_.size());
    for (std::size_t head = 0; head < recheck_.size(); ++head) {
        const auto [p, b] = recheck_[head];
        if (alice_parity_[p][b] > 1) continue;  // pass not yet announced
        if (in_search_[p][b]) continue;         // completion pushes a fresh recheck
        const std::uint32_t lo = b * block_size_[p];
        const std::uint32_t hi = std::min(n, lo + block_size_[p]);
        if (own_parity(p, lo, hi) == alice_parity_[p][b]) continue;
        if (hi - lo == 1) {
            flip(perms_[p][lo]);
        } else {
            active_.push_back({p, b, lo, hi, alice_parity_[p][b], true});
            in_search_[p][b] = 1;
        }
    }
    recheck_.clear();
}

std::vector<ParityRange> CascadeBob::next_request() {
    if (done_) return {};
    if (!pending_.empty()) throw std::logic_error("cascade: request already outstanding");
    advance();
    if (active_.empty() && init_pass_ < passes_) {
        const std::uint32_t n = static_cast<std::uint32_t>(bits_.size());
        const std::uint32_t k = block_size_[init_pass_];
        const std::size_t nb = alice_parity_[init_pass_].size();
        for (std::size_t b = 0; b < nb; ++b) {
            const std::uint32_t lo = static_cast<std::uint32_t>(b) * k;
            pending_.push_back({static_cast<std::uint8_t>(init_pass_), lo, std::min(n, lo + k)});
        }
        pending_init_ = true;
        return pending_;
    }
    if (active_.empty()) {
        done_ = true;
        return {};
    }
    // one left-half query per live search; the right half is inferred
    for (const Search& s : active_)
        pending_.push_back({s.pass, s.lo, s.lo + (s.hi - s.lo) / 2});
    pending_init_ = false;
    return pending_;
}

void CascadeBob::feed(const std::vector<std::uint8_t>& parities) {
    if (pending_.empty()) throw std::logic_error("cascade: feed without outstanding request");
    if (parities.size() != pending_.size())
        throw std::invalid_argument("cascade: parity count mismatch");
    leakage_ += parities.size();
    if (pending_init_) {
        auto& ap = alice_parity_[init_pass_];
        for (std::size_t b = 0; b < ap.size(); ++b) {
            ap[b] = parities[b] & 1;
            recheck_.emplace_back(static_cast<std::uint8_t>(init_pass_),
                                  static_cast<std::uint32_t>(b));
        }
        ++init_pass_;
    } else {
        for (std::size_t k = 0; k < pending_.size(); ++k) {
            Search& s = active_[k];
            if (!s.alive) continue;  // cancelled by an earlier flip in this batch
            const std::uint32_t mid = pending_[k].hi;
            const std::uint8_t alice_left = parities[k] & 1;
            if (own_parity(s.pass, s.lo, mid) != alice_left) {
                s.hi = mid;
                s.alice_parity = alice_left;
            } else {
                s.lo = mid;
                s.alice_parity ^= alice_left;
            }
            if (s.hi - s.lo == 1) {
                s.alive = false;
                in_search_[s.pass][s.block] = 0;
                flip(perms_[s.pass][s.lo]);
                recheck_.emplace_back(s.pass, s.block);
            }
        }
    }
    pending_.clear();
    pending_init_ = false;
    std::erase_if(active_, [](const Search& s) { return !s.alive; });
}

CascadeResult cascade_reconcile(const std::vector<std::uint8_t>& alice_bits,
                                const std::vector<std::uint8_t>& bob_bits, double qber_est,
                                int passes, std::uint64_t seed) {
    if (alice_bits.size() != bob_bits.size())
        throw std::invalid_argument("cascade: bit strings differ in length");
    CascadeAlice alice(alice_bits, passes, seed);
    CascadeBob bob(bob_bits, qber_est, passes, seed);
    while (!bob.done()) {
        const auto ranges = bob.next_request();
        if (ranges.empty()) break;
        bob.feed(alice.parities(ranges));
    }
    CascadeResult res;
    res.corrected = bob.bits();
    res.leakage_bits = bob.leakage_bits();
    res.corrections = bob.corrections();
    res.success = res.corrected == alice_bits;
    return res;
}

// ---- privacy amplification ---------------------------------------------------

long pa_output_length(std::size_t n, double eve_bits_per_symbol, std::size_t leakage_bits,
                      double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("privacy amplification: epsilon outside (0, 1)");
    const double m = std::floor(static_cast<double>(n) * (1.0 - eve_bits_per_symbol) -
                                static_cast<double>(leakage_bits) -
                                2.0 * std::log2(1.0 / epsilon));
    return static_cast<long>(m);
}

std::vector<std::uint8_t> toeplitz_hash(const std::vector<std::uint8_t>& bits, std::size_t m,
                                        std::uint64_t seed) {
    if (m == 0) return {};
    const std::size_t n = bits.size();
    if (n == 0) return std::vector<std::uint8_t>(m, 0);

    // diagonal d of the m x n Toeplitz matrix: T[i][j] = d[i - j + n - 1]
    const std::size_t dlen = m + n - 1;
    const std::size_t dwords = (dlen + 63) / 64;
    std::vector<std::uint64_t> d(dwords + 1, 0);  // padded for window reads
    Rng rng(seed);
    for (std::size_t w = 0; w < dwords; ++w) d[w] = rng.bits();
    if (dlen % 64) d[dwords - 1] &= (~0ull) >> (64 - dlen % 64);

    // key[i] = parity over t of d[i + t] * x[n - 1 - t]
    const std::size_t xwords = (n + 63) / 64;
    std::vector<std::uint64_t> xrev(xwords, 0);
    for (std::size_t t = 0; t < n; ++t)
        if (bits[n - 1 - t] & 1) xrev[t / 64] |= 1ull << (t % 64);

    std::vector<std::uint8_t> key(m);
    for (std::size_t i = 0; i < m; ++i) {
        int par = 0;
        for (std::size_t w = 0; w < xwords; ++w) {
            const std::size_t start = i + 64 * w;
            std::uint64_t win = d[start / 64] >> (start % 64);
            if (start % 64) win |= d[start / 64 + 1] << (64 - start % 64);
            par ^= std::popcount(win & xrev[w]) & 1;
        }
        key[i] = static_cast<std::uint8_t>(par);
    }
    return key;
}

std::vector<std::uint8_t> privacy_amplify(const std::vector<std::uint8_t>& bits,
                                          double eve_bits_per_symbol, std::size_t leakage_bits,
                                          double epsilon, std::uint64_t seed) {
    const long m = pa_output_length(bits.size(), eve_bits_per_symbol, leakage_bits, epsilon);
    if (m <= 0) return {};
    return toeplitz_hash(bits, static_cast<std::size_t>(m), seed);
}

// ---- stage accounting ---------------------------------------------------------

std::vector<StageRow> stage_accounting(const StageInputs& in) {
    const double khz = in.symbol_rate_hz / 1000.0;
    std::vector<StageRow> rows;

    StageRow raw;
    raw.stage = "raw";
    raw.i_ab = in.raw.i_ab;
    raw.eve_info = in.raw.eve;
    raw.net = in.raw.net;
    raw.retained_fraction = 1.0;
    raw.bits_per_symbol = 1.0;  // full symbol-rate convention for the raw row
    raw.rate_kbps = khz;
    rows.push_back(raw);

    StageRow ps;
    ps.stage = "post-selection";
    ps.i_ab = in.ps_i_ab;
    ps.eve_info = in.ps_eve;
    ps.net = in.ps_net;
    ps.retained_fraction = 0.5 * in.kept_over_sifted;  // nominal sifting factor
    ps.bits_per_symbol = 1.0;
    ps.rate_kbps = khz * ps.retained_fraction;
    rows.push_back(ps);

    if (in.reconciled) {
        const double nk = static_cast<double>(in.n_kept);
        const double leak_frac = in.n_kept ? static_cast<double>(in.leakage_bits) / nk : 0.0;

        StageRow rec;
        rec.stage = "reconciliation";
        rec.i_ab = in.n_kept ? 1.0 : 0.0;
        rec.eve_info = std::min(1.0, in.ps_eve + leak_frac);
        rec.net = rec.i_ab - rec.eve_info;
        rec.retained_fraction = ps.retained_fraction;
        rec.bits_per_symbol = std::max(0.0, 1.0 - leak_frac);
        rec.rate_kbps = khz * rec.retained_fraction * rec.bits_per_symbol;
        rows.push_back(rec);

        StageRow pa;
        pa.stage = "privacy-amplification";
        pa.i_ab = in.final_len ? 1.0 : 0.0;
        pa.eve_info = 0.0;
        pa.net = pa.i_ab;
        pa.retained_fraction = ps.retained_fraction;
        pa.bits_per_symbol = in.n_kept ? static_cast<double>(in.final_len) / nk : 0.0;
        pa.rate_kbps = khz * pa.retained_fraction * pa.bits_per_symbol;
        rows.push_back(pa);
    }
    return rows;
}

}  // namespace qkd
