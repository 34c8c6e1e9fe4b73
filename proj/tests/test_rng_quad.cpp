#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "qkd/quad.hpp"
#include "qkd/rng.hpp"

using namespace qkd;

TEST_CASE("derive_seed separates purpose streams") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
    std::set<std::uint64_t> seen;
    for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(derive_seed(42, t));
    CHECK(seen.size() == 1000);
}

TEST_CASE("rng reproducibility and ranges") {
    Rng a(123), b(123), c(124);
    bool same = true, diff = false;
    for (int i = 0; i < 1000; ++i) {
        const double x = a.uniform();
        same = same && (x == b.uniform());
        diff = diff || (x != c.uniform());
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
    CHECK(same);
    CHECK(diff);
}

TEST_CASE("gaussian moments") {
    Rng r(7);
    const int n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double g = r.gaussian();
        s1 += g;
        s2 += g * g;
        s4 += g * g * g * g;
    }
    const double mean = s1 / n, var = s2 / n, kurt = s4 / n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));            // SE = 1/sqrt(n)
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));         // SE ~ sqrt(2/n)
    CHECK(std::abs(kurt - 3.0) < 4.0 * std::sqrt(96.0 / n));       // Var[g^4] = 96
}

TEST_CASE("below and shuffle") {
    Rng r(9);
    for (int i = 0; i < 5000; ++i) CHECK(r.below(17) < 17);
    std::vector<int> v(100);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    r.shuffle(w);
    CHECK(w != v);  // astronomically unlikely to be identity
    std::sort(w.begin(), w.end());
    CHECK(w == v);
}

TEST_CASE("gauss-hermite integrates gaussian moments") {
    const Quadrature q = gauss_hermite(96);
    REQUIRE(q.x.size() == 96);
    const double sqrt_pi = std::sqrt(std::acos(-1.0));
    double w_sum = 0, x2 = 0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
        w_sum += q.w[i];
        x2 += q.w[i] * q.x[i] * q.x[i];
    }
    CHECK(w_sum == doctest::Approx(sqrt_pi).epsilon(1e-12));
    CHECK(x2 == doctest::Approx(0.5 * sqrt_pi).epsilon(1e-12));

    // E over N(mu, sigma^2)
    const double mu = 1.3, sig = 0.7;
    const double m2 = gh_expect(q, mu, sig, [](double y) { return y * y; });
    CHECK(m2 == doctest::Approx(mu * mu + sig * sig).epsilon(1e-12));
    const double ch = gh_expect(q, mu, sig, [](double y) { return std::cos(y); });
    CHECK(ch == doctest::Approx(std::cos(mu) * std::exp(-0.5 * sig * sig)).epsilon(1e-12));
}

TEST_CASE("gauss-legendre integrates smooth functions") {
    const Quadrature q = gauss_legendre(200);
    REQUIRE(q.x.size() == 200);
    double w_sum = 0;
    for (const double w : q.w) w_sum += w;
    CHECK(w_sum == doctest::Approx(2.0).epsilon(1e-13));

    const double pi = std::acos(-1.0);
    CHECK(gl_integrate(q, 0.0, pi, [](double x) { return std::sin(x); }) ==
          doctest::Approx(2.0).epsilon(1e-13));
    CHECK(gl_integrate(q, -8.0, 8.0, [](double x) { return std::exp(-x * x); }) ==
          doctest::Approx(std::sqrt(pi)).epsilon(1e-13));
    CHECK(gl_integrate(q, -1.0, 1.0, [](double x) { return x * x; }) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-13));
}
