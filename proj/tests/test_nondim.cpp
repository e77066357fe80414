#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "washboard/nondim.hpp"
#include "washboard/transport.hpp"

using namespace washboard;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("nondimensionalize: direct substitutions") {
    PhysicalParams p;
    p.L = 2.0;
    p.kBT = 4.0;
    p.D = 1.0;
    p.f_dim = 8.0;
    const auto sys = nondimensionalize(p);
    CHECK(sys.f == doctest::Approx(4.0));
    CHECK(sys.phi(0.37) == 0.0);

    PhysicalParams q;
    q.L = 0.5;
    q.kBT = 2.0;
    q.D = 1.0;
    q.f_dim = 8.0;
    q.phi_dim = [](double x) { return 2.0 * std::cos(2.0 * kPi * x / 0.5); };
    const auto sys2 = nondimensionalize(q);
    CHECK(sys2.f == doctest::Approx(2.0));
    for (double x : {0.0, 0.2, 0.71})
        CHECK(sys2.phi(x) == doctest::Approx(std::cos(2.0 * kPi * x)).epsilon(1e-12));
}

TEST_CASE("nondimensionalize: identity map at unit scales") {
    PhysicalParams p;
    p.f_dim = 1.7;
    p.phi_dim = [](double x) { return 0.5 * std::cos(2.0 * kPi * x); };
    const auto sys = nondimensionalize(p);
    CHECK(sys.f == doctest::Approx(1.7));
    CHECK(sys.phi(0.3) == doctest::Approx(0.5 * std::cos(2.0 * kPi * 0.3)).epsilon(1e-13));
}

TEST_CASE("redimensionalize scalings") {
    PhysicalParams p;
    CHECK(redimensionalize(1.0, 1.0, p) == std::pair{1.0, 1.0});
    PhysicalParams q;
    q.L = 2.0;
    q.D = 3.0;
    const auto [v, d] = redimensionalize(2.0, 1.0, q);
    CHECK(v == doctest::Approx(3.0));
    CHECK(d == doctest::Approx(3.0));
}

TEST_CASE("free-particle round trip reproduces the Einstein drift relation") {
    PhysicalParams p;
    p.L = 3.0;
    p.D = 0.7;
    p.kBT = 2.2;
    p.f_dim = 1.9;
    const auto sys = nondimensionalize(p);
    const auto vr = compute_velocity(sys, QuadratureConfig{});
    const auto [v_dim, d_dim] = redimensionalize(vr.V, 1.0, p);
    CHECK(v_dim == doctest::Approx(p.f_dim * p.D / p.kBT).epsilon(1e-12));
    CHECK(d_dim == doctest::Approx(p.D).epsilon(1e-12));
}

TEST_CASE("results are invariant under the rescaling family L -> lambda L") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> uni(0.5, 3.0);
    for (int trial = 0; trial < 3; ++trial) {
        const double A = uni(gen);
        const double f_tilde = uni(gen);
        double v_ref = 0.0, d_ref = 0.0;
        for (int which = 0; which < 2; ++which) {
            PhysicalParams p;
            p.L = which == 0 ? 1.0 : uni(gen);
            p.kBT = which == 0 ? 1.0 : uni(gen);
            p.D = which == 0 ? 1.0 : uni(gen);
            p.f_dim = f_tilde * p.kBT / p.L;
            const double L = p.L, kBT = p.kBT;
            p.phi_dim = [A, L, kBT](double x) { return A * kBT * std::cos(2.0 * kPi * x / L); };
            const auto sys = nondimensionalize(p);
            const auto tc = compute_diffusion(sys, QuadratureConfig{});
            // compare in dimensionless units: divide the scalings back out
            const auto [v_dim, d_dim] = redimensionalize(tc.V, tc.D_eff, p);
            const double v_tilde = v_dim * p.L / p.D;
            const double d_tilde = d_dim / p.D;
            if (which == 0) {
                v_ref = v_tilde;
                d_ref = d_tilde;
            } else {
                CHECK(v_tilde == doctest::Approx(v_ref).epsilon(1e-10));
                CHECK(d_tilde == doctest::Approx(d_ref).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("validation rejects bad parameters") {
    PhysicalParams p;
    p.L = -1.0;
    CHECK_THROWS_AS(nondimensionalize(p), DomainError);
    PhysicalParams q;
    q.D = 0.0;
    CHECK_THROWS_AS(nondimensionalize(q), DomainError);
    PhysicalParams r;
    r.kBT = -2.0;
    CHECK_THROWS_AS(nondimensionalize(r), DomainError);
    PhysicalParams s;
    s.L = 2.0;
    s.phi_dim = [](double x) { return x; };  // not periodic in L
    CHECK_THROWS_AS(nondimensionalize(s), DomainError);
}

TEST_CASE("nondimensionalized potentials have unit period") {
    PhysicalParams p;
    p.L = 0.25;
    p.phi_dim = [](double x) { return std::sin(2.0 * kPi * x / 0.25); };
    const auto sys = nondimensionalize(p);
    for (int i = 0; i < 64; ++i) {
        const double x = i / 64.0;
        CHECK(sys.phi(x + 1.0) == doctest::Approx(sys.phi(x)).epsilon(1e-12));
    }
}
