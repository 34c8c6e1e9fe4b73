#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qkd/session.hpp"

using namespace qkd;

namespace {

RunConfig base_config() {
    RunConfig cfg;
    cfg.seed = 7;
    cfg.n_symbols = 20000;
    cfg.V = 8.35;
    cfg.eta = 0.8;
    cfg.delta = 0.14;
    cfg.dt_switch_s = 5e-5;  // blocks of 100 so bases mix within small runs
    return cfg;
}

// expected zero-error Cascade disclosure: one parity per top-level block
std::size_t top_level_parities(std::size_t n_kept, double qber_est, int passes) {
    const double q = std::clamp(qber_est, 1e-4, 0.2499);
    std::uint64_t k1 = static_cast<std::uint64_t>(std::ceil(0.73 / q));
    std::size_t total = 0;
    for (int p = 0; p < passes; ++p) {
        std::uint64_t k = k1 << p;
        if (k > n_kept) k = n_kept;
        total += (n_kept + k - 1) / k;
    }
    return total;
}

}  // namespace

TEST_CASE("phase gating of message kinds") {
    const MsgKind kinds[] = {MsgKind::BasisBatch,        MsgKind::SiftKeep,
                             MsgKind::AbsVals,           MsgKind::PsKeep,
                             MsgKind::CascadeParityReq,  MsgKind::CascadeParityResp,
                             MsgKind::PaSeed,            MsgKind::KeyHash,
                             MsgKind::Abort};
    const Phase phases[] = {Phase::Measuring,  Phase::Sifting, Phase::PostSelecting,
                            Phase::Reconciling, Phase::Amplifying, Phase::Done,
                            Phase::Aborted};

    const auto expect = [](Role r, Phase ph, MsgKind k) {
        if (ph == Phase::Done || ph == Phase::Aborted) return false;
        if (k == MsgKind::Abort) return true;
        if (r == Role::Alice) {
            return (ph == Phase::Sifting && k == MsgKind::SiftKeep) ||
                   (ph == Phase::PostSelecting && k == MsgKind::PsKeep) ||
                   (ph == Phase::Reconciling && k == MsgKind::CascadeParityReq) ||
                   (ph == Phase::Amplifying && k == MsgKind::KeyHash);
        }
        return (ph == Phase::Measuring && k == MsgKind::BasisBatch) ||
               (ph == Phase::PostSelecting && k == MsgKind::AbsVals) ||
               (ph == Phase::Reconciling && k == MsgKind::CascadeParityResp) ||
               (ph == Phase::Amplifying && (k == MsgKind::PaSeed || k == MsgKind::KeyHash));
    };

    for (const Role r : {Role::Alice, Role::Bob})
        for (const Phase ph : phases)
            for (const MsgKind k : kinds) {
                INFO("role ", r == Role::Alice ? "alice" : "bob", " phase ",
                     phase_name(ph), " kind ", kind_name(k));
                CHECK(message_allowed(r, ph, k) == expect(r, ph, k));
            }
}

TEST_CASE("noiseless session reconciles without corrections") {
    RunConfig cfg = base_config();
    cfg.seed = 1;
    cfg.n_symbols = 10000;
    cfg.V = 1e6;
    cfg.eta = 1.0;
    cfg.delta = 0.0;

    const SessionResult res = run_session(cfg, TransportKind::Queue);
    REQUIRE(!res.aborted);
    CHECK(res.alice_key == res.bob_key);
    CHECK(!res.alice_key.empty());
    CHECK(res.bob_stats.n_kept == res.bob_stats.n_sifted);  // nothing rejected
    CHECK(res.bob_stats.corrections == 0);
    CHECK(res.bob_stats.eve_bps == doctest::Approx(0.0));
    // with zero corrections the only disclosures are the top-level parities
    CHECK(res.bob_stats.leakage_bits ==
          top_level_parities(res.bob_stats.n_kept, res.bob_stats.qber_est,
                             cfg.cascade_passes));
    // nearly every kept bit survives amplification
    CHECK(res.alice_key.size() >
          res.bob_stats.n_kept - res.bob_stats.leakage_bits - 256);
}

TEST_CASE("sessions are deterministic and transport-independent") {
    const RunConfig cfg = base_config();
    const SessionResult a = run_session(cfg, TransportKind::Queue);
    const SessionResult b = run_session(cfg, TransportKind::Queue);
    const SessionResult c = run_session(cfg, TransportKind::Socket);

    REQUIRE(!a.aborted);
    CHECK(a.alice_key == a.bob_key);
    CHECK(!a.alice_key.empty());

    CHECK(a.transcript == b.transcript);
    CHECK(a.alice_key == b.alice_key);

    CHECK(a.transcript == c.transcript);
    CHECK(a.alice_key == c.alice_key);
    CHECK(a.bob_stats.leakage_bits == c.bob_stats.leakage_bits);

    RunConfig other = cfg;
    other.seed = 8;
    const SessionResult d = run_session(other, TransportKind::Queue);
    CHECK(d.alice_key != a.alice_key);
}

TEST_CASE("transcript accounting matches party stats") {
    const RunConfig cfg = base_config();
    const SessionResult res = run_session(cfg, TransportKind::Queue);
    REQUIRE(!res.aborted);

    const TranscriptStats ts = transcript_leakage(res.transcript);
    CHECK(ts.bytes == res.transcript.size());
    CHECK(ts.bytes == res.transcript_stats.bytes);
    CHECK(ts.frames == res.transcript_stats.frames);
    CHECK(ts.frames >= 8);
    CHECK(ts.parity_bits == res.alice_stats.leakage_bits);
    CHECK(ts.parity_bits == res.bob_stats.leakage_bits);
    CHECK(ts.magnitudes_announced == res.alice_stats.n_sifted);
    CHECK(res.alice_stats.n_sifted == res.bob_stats.n_sifted);
}

TEST_CASE("tampered reconciled bit fails key confirmation") {
    SessionHooks hooks;
    hooks.flip_bit_after_reconcile = true;
    const SessionResult res = run_session(base_config(), TransportKind::Queue, hooks);
    CHECK(res.aborted);
    CHECK(res.abort_reason.find("confirmation") != std::string::npos);
    CHECK(res.alice_key.empty());
    CHECK(res.bob_key.empty());
}

TEST_CASE("machine rejects out-of-phase and honors abort") {
    RunConfig cfg = base_config();
    cfg.n_symbols = 2000;
    const RunRecords rr = simulate_measurements(cfg.source(), cfg.channel(), cfg.timing(),
                                                cfg.n_symbols, cfg.seed);

    SUBCASE("out-of-phase message draws an abort reply") {
        SessionMachine bob(Role::Bob, cfg, rr.bob);
        Message pa;
        pa.kind = MsgKind::PaSeed;
        put_u64_be(pa.payload, 42);
        const auto replies = bob.on_message(pa);
        REQUIRE(replies.size() == 1);
        CHECK(replies[0].kind == MsgKind::Abort);
        CHECK(bob.phase() == Phase::Aborted);
        CHECK(bob.abort_reason().find("PA_SEED") != std::string::npos);
        CHECK(bob.abort_reason().find("measuring") != std::string::npos);

        // terminal phase accepts nothing, replies with nothing
        Message basis;
        basis.kind = MsgKind::BasisBatch;
        put_u32_be(basis.payload, 0);
        CHECK(bob.on_message(basis).empty());
        CHECK(bob.phase() == Phase::Aborted);
    }

    SUBCASE("abort receipt terminates silently") {
        SessionMachine bob(Role::Bob, cfg, rr.bob);
        Message ab;
        ab.kind = MsgKind::Abort;
        ab.payload.push_back(1);
        const std::string why = "operator stop";
        ab.payload.insert(ab.payload.end(), why.begin(), why.end());
        CHECK(bob.on_message(ab).empty());
        CHECK(bob.phase() == Phase::Aborted);
        CHECK(bob.abort_reason() == why);
        CHECK(bob.key().empty());
    }
}

TEST_CASE("session with nothing kept still completes") {
    RunConfig cfg = base_config();
    cfg.seed = 3;
    cfg.n_symbols = 2000;
    cfg.eta = 0.15;
    cfg.delta = 0.29;

    const SessionResult res = run_session(cfg, TransportKind::Queue);
    CHECK(!res.aborted);
    CHECK(res.bob_stats.n_kept == 0);
    CHECK(res.alice_key.empty());
    CHECK(res.bob_key.empty());
    CHECK(res.bob_stats.leakage_bits == 0);
}

TEST_CASE("session keys look uniform across seeds") {
    std::size_t ones = 0, total = 0;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        RunConfig cfg = base_config();
        cfg.seed = seed;
        const SessionResult res = run_session(cfg, TransportKind::Queue);
        REQUIRE(!res.aborted);
        REQUIRE(res.alice_key == res.bob_key);
        for (const auto b : res.alice_key) ones += b;
        total += res.alice_key.size();
    }
    REQUIRE(total > 5000);
    const double frac = static_cast<double>(ones) / static_cast<double>(total);
    const double sigma = 0.5 / std::sqrt(static_cast<double>(total));
    CHECK(std::abs(frac - 0.5) < 4.0 * sigma);
}
