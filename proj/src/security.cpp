#include "qkd/security.hpp"

#include <cmath>
#include <stdexcept>

#include "qkd/quad.hpp"
#include "qkd/rng.hpp"

namespace qkd {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kYMax = 20.0;  // shot-noise standard deviations
constexpr int kGhOrder = 96;
constexpr int kGlOrder = 200;

const Quadrature& gh96() {
    static const Quadrature q = gauss_hermite(kGhOrder);
    return q;
}

const Quadrature& gl200() {
    static const Quadrature q = gauss_legendre(kGlOrder);
    return q;
}

void check_f(double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::domain_error("overlap f must lie in [0, 1]");
}

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace

SecurityContext make_context(double V, const ChannelModel& ch, Attack attack) {
    if (!(V >= 1.0)) throw std::domain_error("security context requires V >= 1");
    if (!(ch.eta > 0.0 && ch.eta <= 1.0)) throw std::domain_error("eta must lie in (0, 1]");
    if (ch.delta < 0.0) throw std::domain_error("delta must be nonnegative");
    SecurityContext ctx;
    ctx.eta = ch.eta;
    ctx.delta = ch.delta;
    ctx.V = V;
    ctx.V_s = 1.0 / V;
    ctx.V_B_N = ch.eta * ctx.V_s + (1.0 - ch.eta) + ch.delta;
    ctx.attack = attack;
    return ctx;
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary_entropy argument outside [0, 1]");
    return -xlog2x(p) - xlog2x(1.0 - p);
}

double bob_outcome_density(double y_B, double y_A, const SecurityContext& ctx) {
    const double mu = std::sqrt(ctx.eta) * y_A;
    const double d = y_B - mu;
    return std::exp(-d * d / (2.0 * ctx.V_B_N)) / std::sqrt(2.0 * kPi * ctx.V_B_N);
}

double bob_error_rate(double y_A_abs, double y_B_abs, const SecurityContext& ctx) {
    if (y_A_abs < 0.0 || y_B_abs < 0.0)
        throw std::domain_error("bob_error_rate expects magnitudes");
    // exp overflow saturates to +inf, giving the correct p -> 0 limit
    return 1.0 / (1.0 + std::exp(2.0 * std::sqrt(ctx.eta) * y_A_abs * y_B_abs / ctx.V_B_N));
}

double mutual_info_ab(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("error rate outside [0, 1]");
    return 1.0 + xlog2x(p) + xlog2x(1.0 - p);
}

double overlap_f(double y_A_abs, const SecurityContext& ctx) {
    if (y_A_abs < 0.0) throw std::domain_error("overlap_f expects a magnitude");
    return std::exp(-(1.0 - ctx.eta) * y_A_abs * y_A_abs / (2.0 * ctx.V_s));
}

double holevo(double f) {
    check_f(f);
    return binary_entropy(0.5 * (1.0 + f));
}

double eve_info_individual(double f) {
    check_f(f);
    const double x = std::sqrt(std::max(0.0, 1.0 - f * f));
    return 0.5 * xlog2x(1.0 + x) + 0.5 * xlog2x(1.0 - x);
}

double eve_bound(double f, Attack attack) {
    return attack == Attack::Collective ? holevo(f) : eve_info_individual(f);
}

PointAssessment point_assess(double y_A_abs, double y_B_abs, const SecurityContext& ctx) {
    PointAssessment a;
    a.y_A_abs = y_A_abs;
    a.y_B_abs = y_B_abs;
    a.p = bob_error_rate(y_A_abs, y_B_abs, ctx);
    a.f = overlap_f(y_A_abs, ctx);
    a.i_ab = mutual_info_ab(a.p);
    a.chi = holevo(a.f);
    a.i_ae = eve_info_individual(a.f);
    a.k_collective = a.i_ab - a.chi;
    a.delta_i_individual = a.i_ab - a.i_ae;
    return a;
}

std::optional<double> boundary(double y_A_abs, const SecurityContext& ctx, Attack attack) {
    if (!(y_A_abs > 0.0)) throw std::domain_error("boundary requires |Y_A| > 0");
    const double eve = eve_bound(overlap_f(y_A_abs, ctx), attack);
    const auto net = [&](double y_B) {
        return mutual_info_ab(bob_error_rate(y_A_abs, y_B, ctx)) - eve;
    };
    if (net(kYMax) < 0.0) return std::nullopt;
    if (net(0.0) >= 0.0) return 0.0;
    double lo = 0.0, hi = kYMax;  // net < 0 at lo, >= 0 at hi; net increasing in y_B
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (net(mid) >= 0.0 ? hi : lo) = mid;
    }
    return hi;
}

double sigma_alice(double V) {
    if (!(V > 1.0)) throw std::domain_error("sigma_alice requires V > 1");
    return std::sqrt(V - 1.0 / V);
}

double frame_overlap(double a_hat, const SecurityContext& ctx) {
    if (a_hat < 0.0) throw std::domain_error("frame_overlap expects a magnitude");
    return std::exp(-(1.0 - ctx.eta) * a_hat * a_hat / (2.0 * ctx.V_B_N));
}

PointAssessment frame_assess(double a_hat, double b_hat, const SecurityContext& ctx) {
    PointAssessment a;
    a.y_A_abs = a_hat;
    a.y_B_abs = b_hat;
    a.p = bob_error_rate(a_hat, b_hat, ctx);
    a.f = frame_overlap(a_hat, ctx);
    a.i_ab = mutual_info_ab(a.p);
    a.chi = holevo(a.f);
    a.i_ae = eve_info_individual(a.f);
    a.k_collective = a.i_ab - a.chi;
    a.delta_i_individual = a.i_ab - a.i_ae;
    return a;
}

EnsembleRates ensemble_rates(const SecurityContext& ctx) {
    const Quadrature& q = gh96();
    const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
    const double s_b = std::sqrt(ctx.V_B_N);
    const double sqrt_eta = std::sqrt(ctx.eta);
    EnsembleRates r;
    for (int i = 0; i < kGhOrder; ++i) {
        const double a = std::sqrt(2.0) * q.x[i];
        const double wa = q.w[i] * inv_sqrt_pi;
        const double f = frame_overlap(std::abs(a), ctx);
        const double eve = eve_bound(f, ctx.attack);
        double iab = 0.0;
        for (int j = 0; j < kGhOrder; ++j) {
            const double b = sqrt_eta * a + std::sqrt(2.0) * s_b * q.x[j];
            const double wb = q.w[j] * inv_sqrt_pi;
            iab += wb * mutual_info_ab(bob_error_rate(std::abs(a), std::abs(b), ctx));
        }
        r.i_ab += wa * iab;
        r.eve += wa * eve;
        r.net += wa * (iab - eve);
    }
    return r;
}

McRates ensemble_rates_mc(const SecurityContext& ctx, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    const double s_b = std::sqrt(ctx.V_B_N);
    const double sqrt_eta = std::sqrt(ctx.eta);
    double s1[3] = {0, 0, 0}, s2[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.gaussian();
        const double b = sqrt_eta * a + s_b * rng.gaussian();
        const PointAssessment pa = frame_assess(std::abs(a), std::abs(b), ctx);
        const double eve = ctx.attack == Attack::Collective ? pa.chi : pa.i_ae;
        const double v[3] = {pa.i_ab, eve, pa.i_ab - eve};
        for (int k = 0; k < 3; ++k) {
            s1[k] += v[k];
            s2[k] += v[k] * v[k];
        }
    }
    McRates out;
    double* mean[3] = {&out.mean.i_ab, &out.mean.eve, &out.mean.net};
    double* se[3] = {&out.se.i_ab, &out.se.eve, &out.se.net};
    for (int k = 0; k < 3; ++k) {
        const double m = s1[k] / static_cast<double>(n);
        const double var = s2[k] / static_cast<double>(n) - m * m;
        *mean[k] = m;
        *se[k] = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
    }
    return out;
}

double wigner_density(double x, double y, const WignerSpec& spec) {
    if (!(spec.V >= 1.0)) throw std::domain_error("wigner spec requires V >= 1");
    const double dx = x - spec.x0;
    const double dy = y - spec.y0;
    // covariance diag(V, 1/V): unit determinant, peak 1/(2*pi)
    return std::exp(-dx * dx / (2.0 * spec.V) - dy * dy * spec.V / 2.0) / (2.0 * kPi);
}

double overlap_numeric(const WignerSpec& plus, const WignerSpec& minus) {
    if (!(plus.V >= 1.0) || std::abs(plus.V - minus.V) > 1e-12 ||
        std::abs(plus.x0 - minus.x0) > 1e-12 || std::abs(plus.y0 + minus.y0) > 1e-12)
        throw std::invalid_argument("overlap specs must differ only by the sign of y0");
    const Quadrature& q = gl200();
    const double sx = std::sqrt(plus.V);
    const double sy = std::sqrt(1.0 / plus.V);
    const double ax = plus.x0 - 9.0 * sx, bx = plus.x0 + 9.0 * sx;
    const double ly = std::abs(plus.y0) + 9.0 * sy;
    double total = 0.0;
    for (int i = 0; i < kGlOrder; ++i) {
        const double x = 0.5 * (bx - ax) * q.x[i] + 0.5 * (bx + ax);
        const double wx = 0.5 * (bx - ax) * q.w[i];
        double inner = 0.0;
        for (int j = 0; j < kGlOrder; ++j) {
            const double y = ly * q.x[j];
            const double wy = ly * q.w[j];
            inner += wy * wigner_density(x, y, plus) * wigner_density(x, y, minus);
        }
        total += wx * inner;
    }
    if (!std::isfinite(total) || total < 0.0)
        throw std::runtime_error("overlap quadrature failed to converge");
    return 4.0 * kPi * total;
}

}  // namespace qkd
