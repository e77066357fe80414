#ifndef WASHBOARD_SDE_HPP
#define WASHBOARD_SDE_HPP

#include <cstdint>
#include <vector>

#include "washboard/quad.hpp"
#include "washboard/transport.hpp"

namespace washboard {

/// Euler-Maruyama ensemble configuration.
///
/// Reproducibility contract: path p uses its own mt19937_64 seeded with
/// splitmix64(seed + (p+1) * 0x9E3779B97F4A7C15); normals come from
/// Box-Muller on 53-bit uniforms (x >> 11) * 2^-53 drawn from that stream,
/// after one initial uniform that places the path via the u0 inverse CDF.
/// Results are therefore identical for any thread count or schedule.
struct SdeConfig {
    double dt = 1e-3;
    double t_final = 50.0;
    int n_paths = 2000;
    std::uint64_t seed = 0;
    /// Fraction of the horizon excluded from the slope fits (fits use the
    /// trailing part only; the simulation always runs from t = 0).
    double burn_in_fraction = 0.5;
    int n_batches = 10;    ///< path-level batches for the 95% CIs
    int n_snapshots = 200; ///< recorded time points for the slope fits
    int n_threads = 0;     ///< 0: hardware concurrency

    void validate() const;
};

struct SdeEstimate {
    double V_hat = 0.0;
    double V_ci = 0.0;      ///< 95% half-width from batch means
    double Deff_hat = 0.0;
    double Deff_ci = 0.0;
    int n_paths = 0;
    double t_final = 0.0;
    bool dt_stability_warning = false;  ///< dt * max|phi''| > 0.5
};

/// Simulate dX = (f - phi'(X)) dt + sqrt(2) dW with initial positions drawn
/// from u0, and estimate V and D_eff from least-squares slopes of the
/// ensemble mean and variance over the post-burn-in window.
SdeEstimate simulate_ensemble(const DimensionlessSystem& sys, const SdeConfig& cfg);

/// Inverse-CDF samples from the piecewise-linear CDF of a normalized u0 grid.
std::vector<double> sample_from_u0(const CellGrid& u0, int count, std::uint64_t seed);

namespace detail {

/// Two-sided 95% Student-t quantile (1.96 beyond the tabulated range).
double t_quantile_975(int dof);

uint64_t splitmix64(std::uint64_t x);

} // namespace detail

} // namespace washboard

#endif
