#ifndef WASHBOARD_QUAD_HPP
#define WASHBOARD_QUAD_HPP

#include <functional>
#include <vector>

#include "washboard/errors.hpp"
#include "washboard/potential.hpp"

namespace washboard {

struct QuadratureConfig {
    int n_grid = 256;          ///< points per unit period, power of two >= 16
    double rel_tol = 1e-10;    ///< refinement stopping criterion
    int max_refinements = 6;

    void validate() const;
};

/// A period-1 function sampled at x_i = i/n. Index arithmetic is modulo n.
struct CellGrid {
    int n = 0;
    std::vector<double> values;

    CellGrid() = default;
    explicit CellGrid(int n_) : n(n_), values(static_cast<std::size_t>(n_), 0.0) {}
    CellGrid(int n_, std::vector<double> v) : n(n_), values(std::move(v)) {}

    double at(long i) const {
        long m = i % n;
        if (m < 0) m += n;
        return values[static_cast<std::size_t>(m)];
    }
};

/// Integral over one period: (1/n) * sum of samples. Equals the trapezoid
/// rule on the periodic grid and is spectrally accurate for smooth g.
double periodic_integral(const CellGrid& g);

/// Weights w_j such that sum_j w_j h(j/n) integrates the trigonometric
/// interpolant of a period-1 function h against exp(-f s) over [0,1].
/// Exact in the exponential factor for any f; reduces to the plain periodic
/// trapezoid (1/n each) at f = 0. n must be a power of two.
std::vector<double> fourier_product_weights(int n, double f);

/// Same, against the weight function g(s) = s instead of exp(-f s).
std::vector<double> fourier_moment_weights(int n);

/// Stabilized evaluation of the shifted exponential integrals
///   sign = +1:  integral over s in [0,1] of exp(phi(x+s) - phi(x) - f s)
///   sign = -1:  integral over s in [0,1] of exp(phi(x) - phi(x-s) - f s)
/// The largest exponent over the s-grid is factored out before
/// exponentiation, so no intermediate overflow occurs while the result is
/// representable. Throws DynamicRangeError when the exponent spread exceeds
/// 1400 or the result overflows double range.
double exp_integral_shifted(const PeriodicPotential& phi, double f, double x, int sign,
                            const QuadratureConfig& cfg, bool split_at_breakpoints = true);

struct Refined {
    double value = 0.0;
    double achieved_rel_err = 0.0;
    int n = 0;  ///< resolution of the last evaluation
};

/// Evaluate `computation` at n, 2n, 4n, ... until the relative change drops
/// below cfg.rel_tol or max_refinements is hit (then NotConvergedError, which
/// carries the last two values). With richardson_order = p > 0 the doubling
/// ladder is Richardson-extrapolated, eliminating error orders p, p+1, ...;
/// convergence is judged on the extrapolated sequence. Use p = 0 for rules
/// that are already spectrally accurate.
Refined refine_until_converged(const std::function<double(int)>& computation,
                               const QuadratureConfig& cfg, int richardson_order = 0);

namespace detail {

/// (e^z - 1)/z, continuous through z = 0.
double e1(double z);

/// integral over [0,1] of sigma * e^(z*sigma), continuous through z = 0.
double e2(double z);

/// Smallest d * 2^k >= n (so the doubling ladder stays aligned to d).
int snap_grid(int n, int d);

/// Cumulative integral U_i = integral of the trig interpolant of v from 0 to
/// i/n. Spectrally accurate for smooth periodic v; v need not have zero mean.
std::vector<double> spectral_cumulative_integral(const std::vector<double>& v);

/// Spectral derivative samples of a smooth periodic grid function.
std::vector<double> spectral_derivative(const std::vector<double>& v);

} // namespace detail

} // namespace washboard

#endif
