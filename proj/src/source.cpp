#include "qkd/source.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

namespace {

constexpr std::uint64_t kPhysicsTag = 0x70687973;      // physics stream
constexpr std::uint64_t kAliceBasisTag = 0x61626173;   // Alice's basis stream
constexpr std::uint64_t kBobBasisTag = 0x62626173;     // Bob's basis stream

void check_v(double V) {
    if (!(V >= 1.0)) throw std::domain_error("source model requires V >= 1");
}

}  // namespace

double variance_from_r(double r) {
    if (r < 0.0) throw std::domain_error("correlation parameter r must be nonnegative");
    return std::cosh(2.0 * r);
}

double squeezing_db(double r) {
    if (r < 0.0) throw std::domain_error("correlation parameter r must be nonnegative");
    // 10*log10(e^{-2r}): correlation variance 2e^{-2r}N0 against the 2N0 shot level
    return -20.0 * r / std::log(10.0);
}

SourceModel source_from_v(double V) {
    check_v(V);
    SourceModel m;
    m.V = V;
    m.r = 0.5 * std::acosh(V);  // equivalent minimum-uncertainty parameter
    m.mode = SourceMode::EffectiveV;
    return m;
}

SourceModel source_from_r(double r) {
    SourceModel m;
    m.V = variance_from_r(r);
    m.r = r;
    m.mode = SourceMode::MinimumUncertainty;
    return m;
}

std::array<std::array<double, 4>, 4> covariance_4d(const SourceModel& model) {
    check_v(model.V);
    const double V = model.V;
    const double c = std::sqrt(V * V - 1.0);
    std::array<std::array<double, 4>, 4> m{};
    for (int i = 0; i < 4; ++i) m[i][i] = V;
    m[0][2] = m[2][0] = -c;  // <X_a X_b>
    m[1][3] = m[3][1] = +c;  // <Y_a Y_b>
    return m;
}

std::vector<Quad4> sample_pairs(const SourceModel& model, std::size_t n, std::uint64_t seed) {
    check_v(model.V);
    if (n < 1) throw std::invalid_argument("sample_pairs: n must be positive");
    const double V = model.V;
    const double c = std::sqrt(V * V - 1.0);
    const double s_v = std::sqrt(V);
    const double s_cond = std::sqrt(1.0 / V);
    Rng rng(seed);
    std::vector<Quad4> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        // two independent 2x2 Cholesky blocks, X anticorrelated, Y correlated
        const double g1 = rng.gaussian();
        const double g2 = rng.gaussian();
        const double g3 = rng.gaussian();
        const double g4 = rng.gaussian();
        Quad4 q;
        q.x_a = s_v * g1;
        q.x_b = -(c / s_v) * g1 + s_cond * g2;
        q.y_a = s_v * g3;
        q.y_b = +(c / s_v) * g3 + s_cond * g4;
        out.push_back(q);
    }
    return out;
}

ChannelOut apply_channel(double bob_in, const ChannelModel& ch, Rng& rng) {
    if (!(ch.eta > 0.0 && ch.eta <= 1.0)) throw std::domain_error("eta must lie in (0, 1]");
    if (ch.delta < 0.0) throw std::domain_error("delta must be nonnegative");
    const double g1 = rng.gaussian();
    const double g2 = rng.gaussian();
    ChannelOut out;
    out.bob = std::sqrt(ch.eta) * bob_in + std::sqrt(1.0 - ch.eta) * g1 +
              std::sqrt(ch.delta) * g2;
    out.eve = std::sqrt(1.0 - ch.eta) * bob_in - std::sqrt(ch.eta) * g1;
    return out;
}

double alice_alpha(double V) {
    check_v(V);
    return std::sqrt(V * V - 1.0) / V;
}

double alice_estimate(double y_a, double V) { return alice_alpha(V) * y_a; }

double conditional_variance(double V) {
    check_v(V);
    return 1.0 / V;
}

CalibrationReport calibrate(double V_A_meas, double V_B_meas, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("eta must lie in (0, 1]");
    if (!(V_A_meas > 1.0 - eta))
        throw std::domain_error("calibration: V_A_meas must exceed 1 - eta");
    CalibrationReport rep;
    rep.V_A_meas = V_A_meas;
    rep.V_B_meas = V_B_meas;
    rep.V_A = (V_A_meas - (1.0 - eta)) / eta;
    rep.V = 0.5 * (rep.V_A + std::sqrt(rep.V_A * rep.V_A + 4.0));  // V - 1/V = V_A
    rep.V_s = 1.0 / rep.V;
    rep.delta = V_B_meas - eta * rep.V_A - eta * rep.V_s - (1.0 - eta);
    if (rep.delta < -1e-6)
        throw std::domain_error("calibration: inferred excess noise is negative");
    if (rep.delta < 0.0) rep.delta = 0.0;  // sampling-noise tolerance
    return rep;
}

std::size_t TimingConfig::block_length() const {
    if (!(dT_sample > 0.0) || !(dt_switch > 0.0) || dt_switch < dT_sample)
        throw std::domain_error("timing requires dt_switch >= dT_sample > 0");
    const auto len = static_cast<std::size_t>(std::llround(dt_switch / dT_sample));
    return len < 1 ? 1 : len;
}

std::vector<Basis> basis_schedule(const TimingConfig& timing, std::size_t n, Rng& rng) {
    const std::size_t block = timing.block_length();
    std::vector<Basis> out(n);
    for (std::size_t start = 0; start < n; start += block) {
        const Basis b = rng.uniform() < 0.5 ? Basis::X : Basis::Y;
        const std::size_t end = std::min(n, start + block);
        for (std::size_t i = start; i < end; ++i) out[i] = b;
    }
    return out;
}

std::vector<PhysicsSample> generate_physics(const SourceModel& model, const ChannelModel& ch,
                                            std::size_t n, std::uint64_t seed) {
    const auto pairs = sample_pairs(model, n, derive_seed(seed, kPhysicsTag));
    Rng rng(derive_seed(seed, kPhysicsTag + 1));
    std::vector<PhysicsSample> out;
    out.reserve(n);
    for (const auto& q : pairs) {
        PhysicsSample s;
        s.x_a = q.x_a;
        s.y_a = q.y_a;
        const ChannelOut cx = apply_channel(q.x_b, ch, rng);
        const ChannelOut cy = apply_channel(q.y_b, ch, rng);
        s.x_b = cx.bob;
        s.x_e = cx.eve;
        s.y_b = cy.bob;
        s.y_e = cy.eve;
        out.push_back(s);
    }
    return out;
}

RunRecords simulate_measurements(const SourceModel& model, const ChannelModel& ch,
                                 const TimingConfig& timing, std::size_t n,
                                 std::uint64_t seed) {
    const auto phys = generate_physics(model, ch, n, seed);
    Rng arng(derive_seed(seed, kAliceBasisTag));
    Rng brng(derive_seed(seed, kBobBasisTag));
    const auto abasis = basis_schedule(timing, n, arng);
    const auto bbasis = basis_schedule(timing, n, brng);
    RunRecords run;
    run.alice.reserve(n);
    run.bob.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        QuadratureRecord a;
        a.index = static_cast<std::uint32_t>(i);
        a.basis = abasis[i];
        a.alice_value = abasis[i] == Basis::X ? phys[i].x_a : phys[i].y_a;
        run.alice.push_back(a);

        QuadratureRecord b;
        b.index = static_cast<std::uint32_t>(i);
        b.basis = bbasis[i];
        b.bob_value = bbasis[i] == Basis::X ? phys[i].x_b : phys[i].y_b;
        b.eve_value = bbasis[i] == Basis::X ? phys[i].x_e : phys[i].y_e;
        run.bob.push_back(b);
    }
    return run;
}

}  // namespace qkd
