#ifndef WASHBOARD_TESTS_ORACLES_HPP
#define WASHBOARD_TESTS_ORACLES_HPP

// Independent reference computations for the test suite. Everything here is
// deliberately written with plain loops and direct exp() calls, sharing no
// code path with the library quadrature engine it is used to check.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Modified Bessel function I0 by its power series: sum (x^2/4)^k / (k!)^2.
inline double bessel_i0(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0, acc = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * k);
        acc += term;
        if (term < 1e-18 * acc) break;
    }
    return acc;
}

/// Plain composite trapezoid of w0(x) = integral over s of
/// exp(phi(x+s) - phi(x) - f s) at a single point.
inline double brute_w0(const std::function<double(double)>& phi, double f, double x, int n) {
    double acc = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double s = static_cast<double>(j) / n;
        const double v = std::exp(phi(x + s) - phi(x) - f * s);
        acc += (j == 0 || j == n) ? 0.5 * v : v;
    }
    return acc / n;
}

/// Reverse-shift inner integral at a point.
inline double brute_reverse(const std::function<double(double)>& phi, double f, double x,
                            int n) {
    double acc = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double s = static_cast<double>(j) / n;
        const double v = std::exp(phi(x) - phi(x - s) - f * s);
        acc += (j == 0 || j == n) ? 0.5 * v : v;
    }
    return acc / n;
}

struct BruteTransport {
    double M0 = 0.0, M1 = 0.0, V = 0.0, Deff = 0.0, zeta = 0.0;
};

/// Full transport quantities by nested trapezoid sums at resolution n,
/// Richardson-extrapolated once (n and 2n) to knock out the h^2 term.
inline BruteTransport brute_transport_single(const std::function<double(double)>& phi,
                                             double f, int n) {
    std::vector<double> w0(static_cast<std::size_t>(n)), rev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / n;
        w0[static_cast<std::size_t>(i)] = brute_w0(phi, f, x, n);
        rev[static_cast<std::size_t>(i)] = brute_reverse(phi, f, x, n);
    }
    BruteTransport bt;
    for (int i = 0; i < n; ++i) {
        bt.M0 += w0[static_cast<std::size_t>(i)];
        bt.M1 += w0[static_cast<std::size_t>(i)] * w0[static_cast<std::size_t>(i)] *
                 rev[static_cast<std::size_t>(i)];
    }
    bt.M0 /= n;
    bt.M1 /= n;
    const double omf = -std::expm1(-f);
    bt.V = (f == 0.0) ? 0.0 : omf / bt.M0;
    bt.Deff = bt.M1 / (bt.M0 * bt.M0 * bt.M0);
    bt.zeta = (f == 0.0) ? bt.M0 : f * bt.M0 / omf;
    return bt;
}

inline BruteTransport brute_transport(const std::function<double(double)>& phi, double f,
                                      int n) {
    const BruteTransport a = brute_transport_single(phi, f, n);
    const BruteTransport b = brute_transport_single(phi, f, 2 * n);
    BruteTransport r;
    r.M0 = b.M0 + (b.M0 - a.M0) / 3.0;
    r.M1 = b.M1 + (b.M1 - a.M1) / 3.0;
    const double omf = -std::expm1(-f);
    r.V = (f == 0.0) ? 0.0 : omf / r.M0;
    r.Deff = r.M1 / (r.M0 * r.M0 * r.M0);
    r.zeta = (f == 0.0) ? r.M0 : f * r.M0 / omf;
    return r;
}

struct BruteSmallF {
    double a0 = 0.0, a1 = 0.0;
};

/// a0 and a1 by brute double trapezoid sums, Richardson-extrapolated.
inline BruteSmallF brute_small_f_single(const std::function<double(double)>& phi, int n) {
    BruteSmallF c;
    double ip = 0.0, im = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / n;
        ip += std::exp(phi(x));
        im += std::exp(-phi(x));
    }
    c.a0 = (ip / n) * (im / n);
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / n;
        double inner = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double s = static_cast<double>(j) / n;
            const double v = std::exp(phi(x + s) - phi(x)) * s;
            inner += (j == 0 || j == n) ? 0.5 * v : v;
        }
        c.a1 += inner / n;
    }
    c.a1 /= n;
    return c;
}

inline BruteSmallF brute_small_f(const std::function<double(double)>& phi, int n) {
    const BruteSmallF a = brute_small_f_single(phi, n);
    const BruteSmallF b = brute_small_f_single(phi, 2 * n);
    return {b.a0 + (b.a0 - a.a0) / 3.0, b.a1 + (b.a1 - a.a1) / 3.0};
}

/// Least-squares slope of log|y| against log x.
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t m = xs.size();
    double lx = 0.0, ly = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        lx += std::log(xs[k]);
        ly += std::log(std::abs(ys[k]));
    }
    lx /= static_cast<double>(m);
    ly /= static_cast<double>(m);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        num += (std::log(xs[k]) - lx) * (std::log(std::abs(ys[k])) - ly);
        den += (std::log(xs[k]) - lx) * (std::log(xs[k]) - lx);
    }
    return num / den;
}

} // namespace oracle

#endif
