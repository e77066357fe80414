#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "washboard/quad.hpp"

using namespace washboard;

namespace {
constexpr double kPi = std::numbers::pi;

CellGrid sampled(int n, const std::function<double(double)>& g) {
    CellGrid out(n);
    for (int i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i)] = g(static_cast<double>(i) / n);
    return out;
}
} // namespace

TEST_CASE("periodic_integral basics") {
    CHECK(periodic_integral(sampled(64, [](double) { return 1.0; })) == doctest::Approx(1.0));
    CHECK(std::abs(periodic_integral(sampled(64, [](double x) { return std::sin(2 * kPi * x); }))) <
          1e-15);
    const double i0 = oracle::bessel_i0(1.0);
    CHECK(periodic_integral(sampled(64, [](double x) { return std::exp(std::cos(2 * kPi * x)); })) ==
          doctest::Approx(i0).epsilon(1e-12));
}

TEST_CASE("pure Fourier modes below Nyquist integrate to zero") {
    const int n = 64;
    for (int k = 1; k < n / 2; k += 5) {
        const auto re = sampled(n, [k](double x) { return std::cos(2 * kPi * k * x); });
        const auto im = sampled(n, [k](double x) { return std::sin(2 * kPi * k * x); });
        CHECK(std::abs(periodic_integral(re)) < 1e-14);
        CHECK(std::abs(periodic_integral(im)) < 1e-14);
    }
}

TEST_CASE("fourier product weights integrate h * e^{-fs} exactly in the f factor") {
    // constant h: rule must give (1 - e^{-f})/f for any n
    for (double f : {0.0, 0.5, 3.0, -2.0, 60.0}) {
        const auto w = fourier_product_weights(256, f);
        double s = 0.0;
        for (double v : w) s += v;
        const double expect = f == 0.0 ? 1.0 : -std::expm1(-f) / f;
        CHECK(s == doctest::Approx(expect).epsilon(1e-12));
    }
    // single harmonics: integrals of cos/sin(2 pi x) e^{-f x} have closed
    // forms; the sine mode is direction-sensitive and pins the convention
    const double f = 1.7;
    const auto w = fourier_product_weights(128, f);
    double sc = 0.0, ss = 0.0;
    for (int j = 0; j < 128; ++j) {
        sc += w[static_cast<std::size_t>(j)] * std::cos(2 * kPi * j / 128.0);
        ss += w[static_cast<std::size_t>(j)] * std::sin(2 * kPi * j / 128.0);
    }
    const double omf = -std::expm1(-f);
    CHECK(sc == doctest::Approx(f * omf / (f * f + 4 * kPi * kPi)).epsilon(1e-12));
    CHECK(ss == doctest::Approx(2 * kPi * omf / (f * f + 4 * kPi * kPi)).epsilon(1e-12));
}

TEST_CASE("fourier moment weights integrate h * s") {
    const auto w = fourier_moment_weights(128);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(s == doctest::Approx(0.5).epsilon(1e-13));  // integral of s over [0,1]
    // integral of cos(2 pi x) * x is 0; integral of sin(2 pi x) * x is -1/(2 pi)
    double c = 0.0, sn = 0.0;
    for (int j = 0; j < 128; ++j) {
        c += w[static_cast<std::size_t>(j)] * std::cos(2 * kPi * j / 128.0);
        sn += w[static_cast<std::size_t>(j)] * std::sin(2 * kPi * j / 128.0);
    }
    CHECK(std::abs(c) < 1e-13);
    CHECK(sn == doctest::Approx(-1.0 / (2 * kPi)).epsilon(1e-12));
}

TEST_CASE("exp_integral_shifted examples") {
    const QuadratureConfig cfg;
    const auto flat = PeriodicPotential::zero();
    CHECK(exp_integral_shifted(flat, 1.0, 0.3, +1, cfg) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(exp_integral_shifted(flat, 0.0, 0.0, +1, cfg) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(exp_integral_shifted(flat, 0.0, 0.7, -1, cfg) == doctest::Approx(1.0).epsilon(1e-13));

    const auto cos1 = PeriodicPotential::cosine(1.0);
    CHECK(exp_integral_shifted(cos1, 0.0, 0.0, +1, cfg) ==
          doctest::Approx(oracle::bessel_i0(1.0) / std::exp(1.0)).epsilon(1e-10));
}

TEST_CASE("stabilized evaluation agrees with the naive weighted sum") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> amp(0.0, 20.0), force(-10.0, 10.0), pos(0.0, 1.0);
    const QuadratureConfig cfg;
    for (int trial = 0; trial < 100; ++trial) {
        const double A = amp(gen);
        const double f = force(gen);
        const double x = pos(gen);
        const auto phi = PeriodicPotential::cosine(A);
        const double stabilized = exp_integral_shifted(phi, f, x, +1, cfg);
        const auto w = fourier_product_weights(cfg.n_grid, f);
        double naive = 0.0;
        for (int j = 0; j < cfg.n_grid; ++j) {
            const double s = static_cast<double>(j) / cfg.n_grid;
            naive += w[static_cast<std::size_t>(j)] * std::exp(phi(x + s) - phi(x));
        }
        CHECK(stabilized == doctest::Approx(naive).epsilon(1e-13));
    }
}

TEST_CASE("large exponents stay finite; excessive spreads throw") {
    const QuadratureConfig cfg;
    const auto big = PeriodicPotential::cosine(200.0);
    const double v = exp_integral_shifted(big, 1.0, 0.5, +1, cfg);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);

    const auto huge = PeriodicPotential::cosine(800.0);  // spread 1600
    CHECK_THROWS_AS(exp_integral_shifted(huge, 0.0, 0.5, +1, cfg), DynamicRangeError);
    const auto overflowing = PeriodicPotential::cosine(500.0);  // result ~ e^1000
    CHECK_THROWS_AS(exp_integral_shifted(overflowing, 0.0, 0.5, +1, cfg), DynamicRangeError);
}

TEST_CASE("piecewise-constant integrand is integrated exactly at any x") {
    // closed form for phi = -A on [0,.5), +A on [.5,1): the integrand is a
    // piecewise exponential in s with jumps where x+s crosses 0 or 0.5
    const double A = 1.0, f = 2.0, x = 0.3;
    const auto pc = PeriodicPotential::piecewise_const(A);
    auto piece = [&](double s0, double s1, double level) {
        // integral of exp(level - phi(x) - f s) over [s0, s1]
        return std::exp(level + A) * (std::exp(-f * s0) - std::exp(-f * s1)) / f;
    };
    // x = 0.3: phi(x) = -A; jumps at s = 0.2 (crosses 0.5) and s = 0.7 (crosses 1)
    const double expect = piece(0.0, 0.2, -A) + piece(0.2, 0.7, A) + piece(0.7, 1.0, -A);
    const QuadratureConfig cfg;
    CHECK(exp_integral_shifted(pc, f, x, +1, cfg) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("breakpoint splitting is a no-op on aligned grids") {
    const auto pc = PeriodicPotential::piecewise_const(1.0);
    const QuadratureConfig cfg;  // n = 256 even, breakpoints at multiples of 1/2
    for (double x : {0.0, 0.25, 0.5, 0.125}) {
        const double with_split = exp_integral_shifted(pc, 1.5, x, +1, cfg, true);
        const double without = exp_integral_shifted(pc, 1.5, x, +1, cfg, false);
        CHECK(with_split == without);
    }
}

TEST_CASE("refine_until_converged") {
    QuadratureConfig cfg;
    cfg.n_grid = 16;
    SUBCASE("spectral integrand converges fast") {
        const auto r = refine_until_converged(
            [](int n) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += std::exp(std::cos(2 * kPi * i / n));
                return s / n;
            },
            cfg);
        CHECK(r.value == doctest::Approx(oracle::bessel_i0(1.0)).epsilon(1e-12));
        CHECK(r.achieved_rel_err < 1e-12);
    }
    SUBCASE("constant converges at the first doubling with zero change") {
        const auto r = refine_until_converged([](int) { return 42.0; }, cfg);
        CHECK(r.value == 42.0);
        CHECK(r.achieved_rel_err == 0.0);
    }
    SUBCASE("non-convergence carries the last two values") {
        try {
            refine_until_converged([](int n) { return 1.0 + 1.0 / n; }, cfg);
            FAIL("expected NotConvergedError");
        } catch (const NotConvergedError& e) {
            CHECK(e.previous_value == doctest::Approx(1.0 + 1.0 / 512.0));
            CHECK(e.last_value == doctest::Approx(1.0 + 1.0 / 1024.0));
        }
    }
    SUBCASE("richardson ladder accelerates h^2 sequences") {
        // trapezoid of a kinked function: exact value 0.25
        const auto r = refine_until_converged(
            [](int n) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double x = static_cast<double>(i) / n;
                    const double tent = x < 0.5 ? x : 1.0 - x;
                    s += tent * tent;  // kinks at nodes; clean h^2 expansion
                }
                return s / n;
            },
            cfg, 2);
        // integral of tent^2 = 2 * integral_0^.5 x^2 = 1/12
        CHECK(r.value == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    }
}

TEST_CASE("config validation") {
    QuadratureConfig cfg;
    cfg.n_grid = 100;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.n_grid = 8;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.n_grid = 256;
    cfg.rel_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("detail helpers: e1, e2, snap_grid") {
    CHECK(detail::e1(0.0) == 1.0);
    CHECK(detail::e1(1e-12) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(detail::e1(2.0) == doctest::Approx((std::exp(2.0) - 1.0) / 2.0).epsilon(1e-14));
    CHECK(detail::e2(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    // series vs closed form across the switch point
    for (double z : {-0.49, -0.1, 0.1, 0.49, 0.51, 2.0, -3.0}) {
        double ref = 0.0;
        const int n = 20000;
        for (int i = 0; i <= n; ++i) {
            const double s = static_cast<double>(i) / n;
            const double v = s * std::exp(z * s);
            ref += (i == 0 || i == n) ? 0.5 * v : v;
        }
        ref /= n;
        CHECK(detail::e2(z) == doctest::Approx(ref).epsilon(1e-8));
    }
    CHECK(detail::snap_grid(256, 1) == 256);
    CHECK(detail::snap_grid(256, 2) == 256);
    CHECK(detail::snap_grid(256, 10) == 320);
    CHECK(detail::snap_grid(320, 10) == 320);
}

TEST_CASE("spectral cumulative integral and derivative") {
    const int n = 128;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = 1.0 + 0.3 * std::cos(2 * kPi * i / static_cast<double>(n));
    const auto u = detail::spectral_cumulative_integral(v);
    for (int i = 0; i < n; i += 7) {
        const double x = static_cast<double>(i) / n;
        const double exact = x + 0.3 * std::sin(2 * kPi * x) / (2 * kPi);
        CHECK(u[static_cast<std::size_t>(i)] == doctest::Approx(exact).epsilon(1e-12));
    }
    const auto d = detail::spectral_derivative(v);
    for (int i = 0; i < n; i += 7) {
        const double x = static_cast<double>(i) / n;
        CHECK(d[static_cast<std::size_t>(i)] ==
              doctest::Approx(-0.3 * 2 * kPi * std::sin(2 * kPi * x)).epsilon(1e-11));
    }
}
