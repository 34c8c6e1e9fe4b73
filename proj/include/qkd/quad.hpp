#pragma once

#include <vector>

namespace qkd {

struct Quadrature {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Hermite rule for integral exp(-x^2) f(x) dx over the real line.
Quadrature gauss_hermite(int n);

// Gauss-Legendre rule on [-1, 1].
Quadrature gauss_legendre(int n);

// E[f(Y)] for Y ~ N(mu, var) using a Gauss-Hermite rule.
template <class F>
double gh_expect(const Quadrature& q, double mu, double sigma, F&& f) {
    const double inv_sqrt_pi = 0.56418958354775628694807945156077;
    const double sqrt2 = 1.4142135623730950488016887242097;
    double acc = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i)
        acc += q.w[i] * f(mu + sqrt2 * sigma * q.x[i]);
    return acc * inv_sqrt_pi;
}

// integral of f over [a, b] using a Gauss-Legendre rule.
template <class F>
double gl_integrate(const Quadrature& q, double a, double b, F&& f) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i)
        acc += q.w[i] * f(mid + half * q.x[i]);
    return acc * half;
}

}  // namespace qkd
