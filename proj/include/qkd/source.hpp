#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qkd/rng.hpp"

namespace qkd {

enum class Basis : std::uint8_t { X = 0, Y = 1 };

enum class SourceMode { MinimumUncertainty, EffectiveV };

// Two-mode squeezed source in shot-noise units (N0 == 1).
struct SourceModel {
    double V = 1.0;  // effective quadrature variance
    double r = 0.0;  // correlation parameter
    SourceMode mode = SourceMode::EffectiveV;
};

// V = cosh(2r).
double variance_from_r(double r);

// Squeezing of the correlation variance relative to shot noise, in dB:
// 10*log10(e^{-2r}).
double squeezing_db(double r);

SourceModel source_from_v(double V);
SourceModel source_from_r(double r);

struct ChannelModel {
    double eta = 1.0;    // transmittivity, (0, 1]
    double delta = 0.0;  // excess noise, >= 0

    // secure-distillation condition
    bool distillation_valid() const { return 2.0 * eta > delta; }
};

struct Quad4 {
    double x_a, y_a, x_b, y_b;
};

// Covariance of (X_a, Y_a, X_b, Y_b): diagonal V, <X_aX_b> = -sqrt(V^2-1),
// <Y_aY_b> = +sqrt(V^2-1), X-Y cross terms zero.
std::array<std::array<double, 4>, 4> covariance_4d(const SourceModel& model);

// i.i.d. draws from the zero-mean Gaussian with covariance_4d.
std::vector<Quad4> sample_pairs(const SourceModel& model, std::size_t n, std::uint64_t seed);

struct ChannelOut {
    double bob;
    double eve;
};

// bob_out = sqrt(eta)*in + sqrt(1-eta)*g1 + sqrt(delta)*g2,
// eve_out = sqrt(1-eta)*in - sqrt(eta)*g1 (beam-splitter complement).
ChannelOut apply_channel(double bob_in, const ChannelModel& ch, Rng& rng);

// alpha = <Y_b Y_a>/<Y_a^2> = sqrt(V^2-1)/V
double alice_alpha(double V);
// Y_A = alpha * y_a
double alice_estimate(double y_a, double V);
// V_s = 1/V
double conditional_variance(double V);

struct CalibrationReport {
    double V_A;       // source-side variance V - 1/V
    double V_A_meas;  // attenuated Alice variance (input)
    double V_B_meas;  // Bob variance (input)
    double V;         // inferred effective variance
    double V_s;       // 1/V
    double delta;     // inferred excess noise
};

// Inverts V_A_meas = eta*V_A + (1-eta), V - 1/V = V_A, and
// V_B_meas = eta*V_A + eta*V_s + (1-eta) + delta.
// Throws on V_A_meas <= 1-eta or inferred delta < -1e-6.
CalibrationReport calibrate(double V_A_meas, double V_B_meas, double eta);

struct TimingConfig {
    double dt_switch = 5e-3;    // basis-hold interval, seconds
    double dT_sample = 5e-7;    // per-symbol measurement time, seconds
    double symbol_rate = 2e6;   // Hz

    std::size_t block_length() const;  // round(dt_switch / dT_sample), >= 1
};

// Bases constant within blocks of block_length() symbols, block values
// i.i.d. uniform over {X, Y}.
std::vector<Basis> basis_schedule(const TimingConfig& timing, std::size_t n, Rng& rng);

struct QuadratureRecord {
    std::uint32_t index = 0;
    Basis basis = Basis::X;
    double alice_value = 0.0;            // filled on Alice's side
    double bob_value = 0.0;              // filled on Bob's side
    std::optional<double> eve_value;     // tapped mode, Bob's side only
};

// One symbol of pre-generated physics: both quadratures of both modes plus
// the channel-transformed values Bob/Eve would read in either basis. Each
// party then consumes only the component matching its own basis choice.
struct PhysicsSample {
    double x_a, y_a;    // Alice's mode
    double x_b, y_b;    // Bob's mode after the channel
    double x_e, y_e;    // Eve's tapped mode
};

std::vector<PhysicsSample> generate_physics(const SourceModel& model, const ChannelModel& ch,
                                            std::size_t n, std::uint64_t seed);

struct RunRecords {
    std::vector<QuadratureRecord> alice;
    std::vector<QuadratureRecord> bob;
};

// Full measurement run: joint physics plus an independent basis schedule per
// party, all derived deterministically from one seed.
RunRecords simulate_measurements(const SourceModel& model, const ChannelModel& ch,
                                 const TimingConfig& timing, std::size_t n, std::uint64_t seed);

}  // namespace qkd
