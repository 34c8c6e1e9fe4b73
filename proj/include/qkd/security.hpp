#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "qkd/source.hpp"

namespace qkd {

enum class Attack { Collective, Individual };

struct SecurityContext {
    double eta = 1.0;
    double delta = 0.0;
    double V = 1.0;
    double V_s = 1.0;    // 1/V
    double V_B_N = 1.0;  // eta*V_s + (1-eta) + delta
    Attack attack = Attack::Collective;
};

SecurityContext make_context(double V, const ChannelModel& ch,
                             Attack attack = Attack::Collective);

// h2(p) = -p log2 p - (1-p) log2 (1-p), with 0 log 0 == 0.
double binary_entropy(double p);

// Gaussian density of Bob's outcome given Alice's scaled estimate:
// mean sqrt(eta)*y_A, variance V_B_N.
double bob_outcome_density(double y_B, double y_A, const SecurityContext& ctx);

// p = 1 / (1 + exp(2*sqrt(eta)*|Y_A|*|Y_B| / V_B_N))
double bob_error_rate(double y_A_abs, double y_B_abs, const SecurityContext& ctx);

// I_AB = 1 - h2(p)
double mutual_info_ab(double p);

// f = exp(-(1-eta)*|Y_A|^2 / (2*V_s))
double overlap_f(double y_A_abs, const SecurityContext& ctx);

// chi = h2((1+f)/2)
double holevo(double f);

// I_AE = (1/2)(1+x)log2(1+x) + (1/2)(1-x)log2(1-x), x = sqrt(1-f^2)
double eve_info_individual(double f);

// chi or I_AE depending on the attack
double eve_bound(double f, Attack attack);

struct PointAssessment {
    double y_A_abs = 0.0;
    double y_B_abs = 0.0;
    double p = 0.5;
    double f = 1.0;
    double i_ab = 0.0;
    double chi = 0.0;
    double i_ae = 0.0;
    double k_collective = 0.0;        // i_ab - chi
    double delta_i_individual = 0.0;  // i_ab - i_ae

    double net(Attack attack) const {
        return attack == Attack::Collective ? k_collective : delta_i_individual;
    }
};

PointAssessment point_assess(double y_A_abs, double y_B_abs, const SecurityContext& ctx);

// Smallest |Y_B| with nonnegative net rate for the given |Y_A|, by bisection
// to 1e-9 over [0, 20]; empty when no such threshold exists.
std::optional<double> boundary(double y_A_abs, const SecurityContext& ctx, Attack attack);

// ---- noise-referenced assessment frame -------------------------------------
//
// Ensemble statistics and the distillation pipeline grade each announced pair
// after referencing it to its own scale: a_hat = |Y_A|/sigma_A is a |N(0,1)|
// draw (sigma_A = sqrt(V - 1/V)) and Bob's recentred magnitude satisfies
// b_hat | a_hat ~ |N(sqrt(eta)*a_hat, V_B_N)|. In this frame Eve's overlap
// exponent carries the post-channel conditional noise V_B_N. The pointwise
// formulas above keep the source-referenced form used for the Fig.-2-style
// boundary curves; both frames share bob_error_rate's functional form.

double sigma_alice(double V);  // sqrt(V - 1/V)

// f = exp(-(1-eta)*a_hat^2 / (2*V_B_N))
double frame_overlap(double a_hat, const SecurityContext& ctx);

PointAssessment frame_assess(double a_hat, double b_hat, const SecurityContext& ctx);

struct EnsembleRates {
    double i_ab = 0.0;
    double eve = 0.0;  // E[chi] or E[I_AE] per ctx.attack
    double net = 0.0;
};

// Expectation of the frame assessment over a ~ N(0,1),
// b | a ~ N(sqrt(eta)*a, V_B_N), nested Gauss-Hermite (96 nodes/dimension).
EnsembleRates ensemble_rates(const SecurityContext& ctx);

struct McRates {
    EnsembleRates mean;
    EnsembleRates se;  // standard errors of the means
};

McRates ensemble_rates_mc(const SecurityContext& ctx, std::size_t n, std::uint64_t seed);

// ---- Wigner oracle ----------------------------------------------------------

struct WignerSpec {
    double x0 = 0.0;
    double y0 = 0.0;
    double V = 1.0;  // covariance diag(V, 1/V), unit determinant
};

double wigner_density(double x, double y, const WignerSpec& spec);

// f^2 = 4*pi * Integral W_plus * W_minus dX dY (normalized units); the specs
// must differ only by the sign of y0. Gauss-Legendre product quadrature.
double overlap_numeric(const WignerSpec& plus, const WignerSpec& minus);

}  // namespace qkd
