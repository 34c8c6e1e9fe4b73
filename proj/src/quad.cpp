#include "qkd/quad.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

// Nodes found by Newton iteration on the orthonormal Hermite recurrence,
// starting from the standard asymptotic guesses for the largest roots.
Quadrature gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: order must be positive");
    const double eps = 1e-14;
    const double pim4 = 0.75112554446494248285870300477623;  // pi^{-1/4}
    Quadrature q;
    q.x.assign(n, 0.0);
    q.w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * q.x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * q.x[1];
        else
            z = 2.0 * z - q.x[i - 2];
        double pp = 0.0;
        for (int it = 0; it < 200; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < eps) break;
        }
        q.x[i] = z;
        q.x[n - 1 - i] = -z;
        q.w[i] = 2.0 / (pp * pp);
        q.w[n - 1 - i] = q.w[i];
    }
    return q;
}

Quadrature gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
    const double eps = 1e-14;
    const double pi = 3.1415926535897932384626433832795;
    Quadrature q;
    q.x.assign(n, 0.0);
    q.w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 200; ++it) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < eps) break;
        }
        q.x[i] = -z;
        q.x[n - 1 - i] = z;
        q.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        q.w[n - 1 - i] = q.w[i];
    }
    return q;
}

}  // namespace qkd
