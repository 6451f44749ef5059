#pragma once

// Test-only oracles, independent of the library implementation paths they
// check: generic adaptive quadrature, composite Gauss-Legendre, and a
// brute-force Riemann-Liouville integral evaluated by substitution.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracles {

inline double simpson(const std::function<double(double)>& f, double a, double b) {
    return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(f, a, m), right = simpson(f, m, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, left, tol / 2, depth - 1) +
           adaptive_simpson_rec(f, m, b, right, tol / 2, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 40) {
    if (a == b) return 0.0;
    return adaptive_simpson_rec(f, a, b, simpson(f, a, b), tol, depth);
}

// 16-point Gauss-Legendre on [a,b], composite over n subintervals.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                             int subintervals = 8) {
    static const double xs[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                 0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                 0.9445750230732326, 0.9894009349916499};
    static const double ws[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                 0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};
    double total = 0.0;
    const double h = (b - a) / subintervals;
    for (int s = 0; s < subintervals; ++s) {
        const double lo = a + s * h, hi = lo + h;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double acc = 0.0;
        for (int i = 0; i < 8; ++i)
            acc += ws[i] * (f(mid + half * xs[i]) + f(mid - half * xs[i]));
        total += half * acc;
    }
    return total;
}

// Brute-force (I^order_{0+} f)(t): substitute u = (t-s)^order to remove the
// endpoint singularity, then integrate the smooth transform.
inline double rl_integral_brute(const std::function<double(double)>& f, double t, double order,
                                double gamma_order) {
    if (t == 0.0) return 0.0;
    // int_0^t (t-s)^{order-1} f(s) ds = (1/order^..) int_0^{t^order} f(t - u^{1/order}) du
    auto g = [&](double u) { return f(t - std::pow(u, 1.0 / order)); };
    return adaptive_simpson(g, 0.0, std::pow(t, order), 1e-13) / (order * gamma_order);
}

}  // namespace oracles
