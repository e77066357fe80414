#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "washboard/sde.hpp"

using namespace washboard;

namespace {
constexpr double kPi = std::numbers::pi;

SdeConfig quick_cfg() {
    SdeConfig cfg;
    cfg.dt = 2e-3;
    cfg.t_final = 20.0;
    cfg.n_paths = 600;
    cfg.seed = 42;
    return cfg;
}
} // namespace

TEST_CASE("free particle: estimates cover the exact law") {
    const DimensionlessSystem sys{PeriodicPotential::zero(), 2.0};
    const auto est = simulate_ensemble(sys, quick_cfg());
    CHECK(std::abs(est.V_hat - 2.0) <= est.V_ci);
    CHECK(std::abs(est.Deff_hat - 1.0) <= 1.5 * est.Deff_ci);
    CHECK(est.V_ci > 0.0);
    CHECK(est.Deff_ci > 0.0);
    CHECK_FALSE(est.dt_stability_warning);
}

TEST_CASE("seed determinism: identical configs give bit-identical estimates") {
    const DimensionlessSystem sys{PeriodicPotential::cosine(1.0), 1.0};
    SdeConfig cfg = quick_cfg();
    cfg.t_final = 5.0;
    cfg.n_paths = 200;
    const auto a = simulate_ensemble(sys, cfg);
    const auto b = simulate_ensemble(sys, cfg);
    CHECK(a.V_hat == b.V_hat);
    CHECK(a.Deff_hat == b.Deff_hat);
    CHECK(a.V_ci == b.V_ci);
    // and is independent of the thread count
    cfg.n_threads = 1;
    const auto c = simulate_ensemble(sys, cfg);
    cfg.n_threads = 4;
    const auto d = simulate_ensemble(sys, cfg);
    CHECK(c.V_hat == d.V_hat);
    CHECK(c.Deff_hat == d.Deff_hat);
}

TEST_CASE("cosine system: estimates cover the transport values") {
    const DimensionlessSystem sys{PeriodicPotential::cosine(1.0), 1.0};
    const auto tc = compute_diffusion(sys, QuadratureConfig{});
    SdeConfig cfg = quick_cfg();
    cfg.dt = 1e-3;
    cfg.n_paths = 1000;
    const auto est = simulate_ensemble(sys, cfg);
    CHECK(std::abs(est.V_hat - tc.V) <= 2.0 * est.V_ci);
    CHECK(std::abs(est.Deff_hat - tc.D_eff) <= 2.0 * est.Deff_ci);
}

TEST_CASE("zero force: V covered by the CI around zero") {
    const DimensionlessSystem sys{PeriodicPotential::cosine(2.0), 0.0};
    SdeConfig cfg = quick_cfg();
    cfg.t_final = 30.0;
    const auto est = simulate_ensemble(sys, cfg);
    CHECK(std::abs(est.V_hat) <= 2.0 * est.V_ci);
    const double i0 = oracle::bessel_i0(2.0);
    CHECK(std::abs(est.Deff_hat - 1.0 / (i0 * i0)) <= 2.5 * est.Deff_ci);
}

TEST_CASE("dt refinement moves the estimate by less than its CI") {
    const DimensionlessSystem sys{PeriodicPotential::zero(), 1.0};
    SdeConfig cfg = quick_cfg();
    cfg.t_final = 10.0;
    const auto coarse = simulate_ensemble(sys, cfg);
    cfg.dt /= 2.0;
    const auto fine = simulate_ensemble(sys, cfg);
    CHECK(std::abs(fine.V_hat - coarse.V_hat) <= coarse.V_ci + fine.V_ci);
}

TEST_CASE("piecewise-constant drift is rejected") {
    const DimensionlessSystem sys{PeriodicPotential::piecewise_const(1.0), 1.0};
    CHECK_THROWS_AS(simulate_ensemble(sys, quick_cfg()), DomainError);
}

TEST_CASE("sawtooth drift is allowed") {
    const DimensionlessSystem sys{PeriodicPotential::sawtooth(1.0, 0.25), 1.5};
    SdeConfig cfg = quick_cfg();
    cfg.t_final = 5.0;
    cfg.n_paths = 200;
    const auto est = simulate_ensemble(sys, cfg);
    CHECK(std::isfinite(est.V_hat));
}

TEST_CASE("stiff potentials raise the dt warning") {
    const DimensionlessSystem sys{PeriodicPotential::cosine(100.0), 1.0};
    SdeConfig cfg = quick_cfg();
    cfg.t_final = 1.0;
    cfg.dt = 1e-3;
    cfg.n_paths = 100;
    const auto est = simulate_ensemble(sys, cfg);
    CHECK(est.dt_stability_warning);  // dt * (2 pi)^2 * 100 >> 0.5
}

TEST_CASE("config validation") {
    SdeConfig cfg;
    cfg.dt = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = SdeConfig{};
    cfg.t_final = cfg.dt * 50;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = SdeConfig{};
    cfg.n_paths = 50;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = SdeConfig{};
    cfg.burn_in_fraction = 0.7;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("sample_from_u0") {
    SUBCASE("uniform density passes a Kolmogorov-Smirnov check") {
        CellGrid u0(64);
        for (auto& v : u0.values) v = 1.0;
        const auto xs = sample_from_u0(u0, 5000, 1);
        std::vector<double> sorted = xs;
        std::sort(sorted.begin(), sorted.end());
        double ks = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const double ecdf_hi = static_cast<double>(i + 1) / sorted.size();
            const double ecdf_lo = static_cast<double>(i) / sorted.size();
            ks = std::max(ks, std::max(std::abs(ecdf_hi - sorted[i]),
                                       std::abs(sorted[i] - ecdf_lo)));
        }
        CHECK(ks < 1.358 / std::sqrt(5000.0));  // 95% critical value
    }
    SUBCASE("Boltzmann density reproduces the cosine moment") {
        const DimensionlessSystem sys{PeriodicPotential::cosine(1.0), 0.0};
        const auto u0 = compute_u0(sys, QuadratureConfig{});
        // quadrature moment of cos(2 pi x) under u0
        double moment = 0.0;
        for (int i = 0; i < u0.n; ++i)
            moment += std::cos(2 * kPi * i / u0.n) * u0.values[static_cast<std::size_t>(i)];
        moment /= u0.n;
        const int count = 20000;
        const auto xs = sample_from_u0(u0, count, 7);
        double mean = 0.0, var = 0.0;
        for (double x : xs) mean += std::cos(2 * kPi * x);
        mean /= count;
        for (double x : xs) var += (std::cos(2 * kPi * x) - mean) * (std::cos(2 * kPi * x) - mean);
        var /= (count - 1);
        const double se = std::sqrt(var / count);
        CHECK(std::abs(mean - moment) < 3.0 * se);
    }
    SUBCASE("zero count gives an empty sample") {
        CellGrid u0(16);
        for (auto& v : u0.values) v = 1.0;
        CHECK(sample_from_u0(u0, 0, 3).empty());
    }
    SUBCASE("unnormalized input is rejected") {
        CellGrid u0(16);
        for (auto& v : u0.values) v = 2.0;
        CHECK_THROWS_AS(sample_from_u0(u0, 10, 3), DomainError);
    }
}
