#include <doctest.h>

#include <cmath>

#include "qkd/quad.hpp"
#include "qkd/security.hpp"

using namespace qkd;

namespace {

// context built from the rounded calibration point (V_s = 0.12)
SecurityContext reference_ctx(double eta, double delta, Attack attack = Attack::Collective) {
    SecurityContext ctx;
    ctx.eta = eta;
    ctx.delta = delta;
    ctx.V = 1.0 / 0.12;
    ctx.V_s = 0.12;
    ctx.V_B_N = eta * 0.12 + (1.0 - eta) + delta;
    ctx.attack = attack;
    return ctx;
}

}  // namespace

TEST_CASE("context arithmetic") {
    const SecurityContext c80 = make_context(8.35, ChannelModel{0.8, 0.14});
    CHECK(std::abs(c80.V_B_N - 0.436) < 5e-4);
    CHECK(c80.V_s == doctest::Approx(1.0 / 8.35));
    const SecurityContext c40 = make_context(8.35, ChannelModel{0.4, 0.11});
    CHECK(std::abs(c40.V_B_N - 0.758) < 5e-4);
}

TEST_CASE("bob outcome density") {
    const SecurityContext ctx = reference_ctx(0.8, 0.14);
    const double y_a = 1.3;
    const double peak = bob_outcome_density(std::sqrt(0.8) * y_a, y_a, ctx);
    CHECK(peak == doctest::Approx(1.0 / std::sqrt(2.0 * std::acos(-1.0) * ctx.V_B_N)));
    // normalization by quadrature
    const Quadrature q = gauss_legendre(200);
    const double total = gl_integrate(q, -30.0, 30.0, [&](double y) {
        return bob_outcome_density(y, y_a, ctx);
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("per-point security quantities at the reference operating point") {
    const SecurityContext ctx = reference_ctx(0.8, 0.14);
    CHECK(ctx.V_B_N == doctest::Approx(0.436));

    const double p = bob_error_rate(1.0, 1.0, ctx);
    CHECK(std::abs(p - 0.0163) < 1e-4);
    CHECK(bob_error_rate(0.0, 5.0, ctx) == doctest::Approx(0.5));

    CHECK(mutual_info_ab(0.5) == doctest::Approx(0.0));
    CHECK(mutual_info_ab(0.0) == doctest::Approx(1.0));
    CHECK(std::abs(mutual_info_ab(0.0163) - 0.880) < 1e-3);

    const double f = overlap_f(1.0, ctx);
    CHECK(std::abs(f - 0.4346) < 1e-3);  // exp(-0.8333)
    CHECK(overlap_f(0.0, ctx) == doctest::Approx(1.0));
    SecurityContext lossless = ctx;
    lossless.eta = 1.0;
    CHECK(overlap_f(3.7, lossless) == doctest::Approx(1.0));

    CHECK(holevo(0.0) == doctest::Approx(1.0));
    CHECK(holevo(1.0) == doctest::Approx(0.0));
    CHECK(std::abs(holevo(0.5) - 0.8113) < 1e-3);

    CHECK(eve_info_individual(0.0) == doctest::Approx(1.0));
    CHECK(eve_info_individual(1.0) == doctest::Approx(0.0));
    CHECK(std::abs(eve_info_individual(0.6) - 0.5310) < 1e-3);

    const PointAssessment pa = point_assess(1.0, 1.0, ctx);
    CHECK(std::abs(pa.k_collective - 0.021) < 1e-3);
    CHECK(pa.k_collective > 0.0);
    CHECK(pa.delta_i_individual > pa.k_collective);  // I_AE < chi here

    const PointAssessment zero = point_assess(0.0, 1.0, ctx);
    CHECK(zero.k_collective == doctest::Approx(0.0));
    CHECK(zero.delta_i_individual == doctest::Approx(0.0));

    SecurityContext perfect = ctx;
    perfect.eta = 1.0;
    perfect.delta = 0.0;
    perfect.V_B_N = 0.12;
    CHECK(point_assess(6.0, 6.0, perfect).k_collective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("monotonicity properties") {
    const SecurityContext ctx = make_context(8.35, ChannelModel{0.8, 0.14});

    double prev = 1.0;
    for (int i = 1; i <= 200; ++i) {
        const double prod = 0.05 * i;
        const double p = bob_error_rate(prod, 1.0, ctx);
        CHECK(p <= prev);
        prev = p;
    }

    prev = 0.0;
    for (int i = 0; i <= 100; ++i) {  // I_AB nonincreasing in p on [0, 1/2]
        const double p = 0.5 - 0.005 * i;
        const double v = mutual_info_ab(p);
        CHECK(v >= prev);
        prev = v;
    }

    double prev_f = 2.0;
    for (int i = 0; i <= 200; ++i) {
        const double f = overlap_f(0.02 * i, ctx);
        CHECK(f <= prev_f);
        prev_f = f;
    }
    for (int i = 1; i <= 20; ++i) {  // nondecreasing in eta
        SecurityContext a = ctx, b = ctx;
        a.eta = 0.04 * i;
        b.eta = std::min(1.0, a.eta + 0.04);
        CHECK(overlap_f(1.7, b) >= overlap_f(1.7, a));
    }

    double prev_chi = 2.0, prev_iae = 2.0;
    bool chi_bound = true;
    for (int i = 0; i <= 10000; ++i) {
        const double f = i / 10000.0;
        const double c = holevo(f), e = eve_info_individual(f);
        CHECK(c <= prev_chi);
        CHECK(e <= prev_iae);
        prev_chi = c;
        prev_iae = e;
        chi_bound = chi_bound && (e <= c + 1e-12);
        if (i != 0 && i != 10000) chi_bound = chi_bound && (e < c);
    }
    CHECK(chi_bound);
    CHECK(eve_info_individual(0.0) == doctest::Approx(holevo(0.0)));
    CHECK(eve_info_individual(1.0) == doctest::Approx(holevo(1.0)));
}

TEST_CASE("post-selection boundary") {
    SUBCASE("lossless channel has zero threshold") {
        const SecurityContext ctx = make_context(8.35, ChannelModel{1.0, 0.0});
        for (const double y : {0.1, 1.0, 3.0}) {
            const auto t = boundary(y, ctx, Attack::Collective);
            REQUIRE(t.has_value());
            CHECK(*t == doctest::Approx(0.0).epsilon(1e-6));
        }
    }

    SUBCASE("bisection matches sign change and attack ordering") {
        const SecurityContext ctx = make_context(8.35, ChannelModel{0.8, 0.14});
        for (int i = 1; i <= 40; ++i) {
            const double y_a = 0.125 * i;
            const auto tc = boundary(y_a, ctx, Attack::Collective);
            const auto ti = boundary(y_a, ctx, Attack::Individual);
            if (tc) {
                if (*tc > 1e-6)
                    CHECK(point_assess(y_a, *tc - 1e-6, ctx).k_collective < 0.0);
                CHECK(point_assess(y_a, *tc + 1e-6, ctx).k_collective >= 0.0);
            }
            if (ti && tc) CHECK(*ti <= *tc + 1e-9);
        }
    }

    SUBCASE("brute-force scan oracle on random channels") {
        Rng rng(31);
        int checked = 0;
        for (int trial = 0; trial < 50; ++trial) {
            const double eta = 0.25 + 0.7 * rng.uniform();
            const double delta = 0.3 * rng.uniform();
            const double V = 2.0 + 10.0 * rng.uniform();
            const SecurityContext ctx = make_context(V, ChannelModel{eta, delta});
            const Attack atk = rng.bits() & 1 ? Attack::Collective : Attack::Individual;
            const double y_a = 0.2 + 3.0 * rng.uniform();
            const auto t = boundary(y_a, ctx, atk);
            // brute scan at 1e-4
            double scan = -1.0;
            for (double y = 0.0; y <= 20.0; y += 1e-4) {
                if (point_assess(y_a, y, ctx).net(atk) >= 0.0) {
                    scan = y;
                    break;
                }
            }
            if (t.has_value() != (scan >= 0.0)) {
                CHECK(t.has_value() == (scan >= 0.0));
                continue;
            }
            if (t) {
                CHECK(std::abs(*t - scan) <= 1e-4 + 1e-6);
                ++checked;
            }
        }
        CHECK(checked > 10);  // the draw ranges make thresholds common
    }
}

TEST_CASE("ensemble rates against pinned quadrature values") {
    SecurityContext c80 = make_context(8.35, ChannelModel{0.8, 0.14});
    const EnsembleRates r80 = ensemble_rates(c80);
    CHECK(r80.i_ab == doctest::Approx(0.458243).epsilon(5e-6));
    CHECK(r80.eve == doctest::Approx(0.345030).epsilon(5e-6));
    CHECK(r80.net == doctest::Approx(0.113213).epsilon(5e-5));

    SecurityContext c40 = make_context(8.35, ChannelModel{0.4, 0.11});
    const EnsembleRates r40 = ensemble_rates(c40);
    CHECK(r40.i_ab == doctest::Approx(0.235537).epsilon(5e-6));
    CHECK(r40.eve == doctest::Approx(0.442626).epsilon(5e-6));
    CHECK(r40.net < 0.0);

    c80.attack = Attack::Individual;
    CHECK(ensemble_rates(c80).eve == doctest::Approx(0.227647).epsilon(5e-6));
    c40.attack = Attack::Individual;
    CHECK(ensemble_rates(c40).eve == doctest::Approx(0.321818).epsilon(5e-6));

    // lossless: Eve learns nothing
    const SecurityContext ideal = make_context(8.35, ChannelModel{1.0, 0.0});
    CHECK(ensemble_rates(ideal).eve == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("quadrature ensemble matches Monte Carlo") {
    for (const auto& [eta, delta] : {std::pair{0.8, 0.14}, std::pair{0.4, 0.11}}) {
        const SecurityContext ctx = make_context(8.35, ChannelModel{eta, delta});
        const EnsembleRates exact = ensemble_rates(ctx);
        const McRates mc = ensemble_rates_mc(ctx, 1000000, 51);
        CHECK(std::abs(mc.mean.i_ab - exact.i_ab) < 4.0 * mc.se.i_ab);
        CHECK(std::abs(mc.mean.eve - exact.eve) < 4.0 * mc.se.eve);
        CHECK(std::abs(mc.mean.net - exact.net) < 4.0 * mc.se.net);
    }
}

TEST_CASE("wigner oracle") {
    SUBCASE("density basics") {
        const WignerSpec w{0.3, -0.2, 8.35};
        const double pi = std::acos(-1.0);
        CHECK(wigner_density(0.3, -0.2, w) == doctest::Approx(1.0 / (2.0 * pi)));
        CHECK(wigner_density(1.3, -0.2 + 0.07, w) ==
              doctest::Approx(wigner_density(1.3, -0.2 - 0.07, w)));
        // monotone decay along each axis from the center
        CHECK(wigner_density(0.3, 0.1, w) > wigner_density(0.3, 0.4, w));
        CHECK(wigner_density(1.0, -0.2, w) > wigner_density(2.0, -0.2, w));
        // normalization via product Gauss-Legendre
        const Quadrature q = gauss_legendre(200);
        const double sx = 9.0 * std::sqrt(8.35), sy = 9.0 * std::sqrt(1.0 / 8.35);
        const double total = gl_integrate(q, 0.3 - sx, 0.3 + sx, [&](double x) {
            return gl_integrate(q, -0.2 - sy, -0.2 + sy,
                                [&](double y) { return wigner_density(x, y, w); });
        });
        CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }

    SUBCASE("numeric overlap equals the closed form") {
        // reference point: Y0 = sqrt(1-eta)*y_A, eta = 0.8, y_A = 1, V_s = 0.12
        const double y0 = std::sqrt(0.2) * 1.0;
        const WignerSpec plus{0.0, y0, 1.0 / 0.12};
        const WignerSpec minus{0.0, -y0, 1.0 / 0.12};
        const double f2 = overlap_numeric(plus, minus);
        CHECK(std::abs(f2 - 0.1889) < 5e-4);
        CHECK(f2 == doctest::Approx(std::exp(-0.2 / 0.12)).epsilon(1e-6));

        // identical states
        const WignerSpec c{0.0, 0.0, 4.0};
        CHECK(overlap_numeric(c, c) == doctest::Approx(1.0).epsilon(1e-9));

        // f^2 decreasing in |Y0|
        double prev = 2.0;
        for (int i = 0; i <= 8; ++i) {
            const double y = 0.25 * i;
            const double v =
                overlap_numeric(WignerSpec{0.0, y, 8.35}, WignerSpec{0.0, -y, 8.35});
            CHECK(v < prev);
            prev = v;
        }
    }

    SUBCASE("grid agreement with overlap_f squared") {
        // the acceptance grid: y_A in [0,3], eta in [0.2,1], V_s in [0.05,1]
        for (int iy = 0; iy < 5; ++iy) {
            for (int ie = 0; ie < 5; ++ie) {
                for (int iv = 0; iv < 5; ++iv) {
                    const double y_a = 3.0 * iy / 4.0;
                    const double eta = 0.2 + 0.8 * ie / 4.0;
                    const double v_s = 0.05 + 0.95 * iv / 4.0;
                    SecurityContext ctx;
                    ctx.eta = eta;
                    ctx.V_s = v_s;
                    ctx.V = 1.0 / v_s;
                    ctx.V_B_N = eta * v_s + (1.0 - eta);
                    const double f = overlap_f(y_a, ctx);
                    const double y0 = std::sqrt(1.0 - eta) * y_a;
                    const double num = overlap_numeric(WignerSpec{0.0, y0, 1.0 / v_s},
                                                       WignerSpec{0.0, -y0, 1.0 / v_s});
                    CHECK(std::abs(num - f * f) <= 1e-6 * std::max(f * f, 1e-300));
                }
            }
        }
    }
}

TEST_CASE("noise-referenced frame") {
    const SecurityContext ctx = make_context(8.35, ChannelModel{0.8, 0.14});
    CHECK(sigma_alice(8.35) == doctest::Approx(std::sqrt(8.35 - 1.0 / 8.35)));
    CHECK(frame_overlap(0.0, ctx) == doctest::Approx(1.0));
    CHECK(frame_overlap(1.0, ctx) ==
          doctest::Approx(std::exp(-0.2 / (2.0 * ctx.V_B_N))));
    const PointAssessment pa = frame_assess(1.0, 1.0, ctx);
    CHECK(pa.f == doctest::Approx(frame_overlap(1.0, ctx)));
    CHECK(pa.p == doctest::Approx(bob_error_rate(1.0, 1.0, ctx)));
    CHECK(pa.k_collective == doctest::Approx(pa.i_ab - pa.chi));
}
