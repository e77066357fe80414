#ifndef WASHBOARD_POTENTIAL_HPP
#define WASHBOARD_POTENTIAL_HPP

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "washboard/errors.hpp"

namespace washboard {

enum class PotentialKind { Cosine, PiecewiseConst, Sawtooth, Tabulated, Custom };

/// A period-1 potential phi(x) in units of kBT.
///
/// All evaluation wraps x into [0,1) first, so callers may pass any real x.
/// Discontinuity locations (jumps or derivative kinks) are first-class
/// metadata: quadrature aligns its grids to them, and value_left/value_right
/// expose the one-sided limits that the aligned rules need.
class PeriodicPotential {
public:
    static PeriodicPotential cosine(double A);

    /// Two-level potential: -A on [0, 0.5), +A on [0.5, 1). No derivative.
    static PeriodicPotential piecewise_const(double A);

    /// Continuous piecewise-linear potential with minimum 0 at x = 0 and
    /// peak A at x = alpha, alpha in (0,1). alpha != 0.5 breaks evenness.
    static PeriodicPotential sawtooth(double A, double alpha);

    /// Uniform samples at x_i = i/N. Smooth variant (no breakpoints) is
    /// evaluated by trigonometric interpolation; declaring breakpoints
    /// switches to periodic linear interpolation between samples.
    static PeriodicPotential tabulated(std::vector<double> samples,
                                       std::vector<double> breakpoints = {});

    static PeriodicPotential custom(std::function<double(double)> value,
                                    std::function<double(double)> derivative = {},
                                    std::vector<double> breakpoints = {});

    /// phi == 0 (free particle).
    static PeriodicPotential zero() { return cosine(0.0); }

    /// Wrapped evaluation phi(x mod 1).
    double operator()(double x) const { return value_right(x); }
    double value(double x) const { return value_right(x); }

    /// One-sided limits at the wrapped coordinate; they differ only at jumps.
    double value_right(double x) const;
    double value_left(double x) const;

    /// Analytic derivative for built-in families, spectral derivative for
    /// smooth tabulated potentials. Throws NonDifferentiableError at a
    /// breakpoint or when the family has no derivative.
    double derivative(double x) const;

    bool has_derivative() const;
    bool is_smooth() const { return breakpoints_.empty(); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    PotentialKind kind() const { return kind_; }
    double amplitude() const { return amplitude_; }
    double asymmetry() const { return alpha_; }
    const std::vector<double>& samples() const { return samples_; }

    /// Smallest q such that every non-smooth point lies on the grid {i/q}.
    /// 1 for smooth potentials. Quadrature grids are multiples of this.
    int grid_denominator() const { return grid_denominator_; }

    nlohmann::json to_json() const;
    static PeriodicPotential from_json(const nlohmann::json& j);
    static PeriodicPotential from_json_text(const std::string& text);

private:
    PeriodicPotential() = default;

    PotentialKind kind_ = PotentialKind::Cosine;
    double amplitude_ = 0.0;
    double alpha_ = 0.5;
    std::vector<double> samples_;
    std::vector<std::complex<double>> fourier_;  // tabulated smooth only
    std::function<double(double)> custom_value_;
    std::function<double(double)> custom_derivative_;
    std::vector<double> breakpoints_;
    int grid_denominator_ = 1;

    double tabulated_value(double u) const;
    double tabulated_derivative(double u) const;
    bool near_breakpoint(double u) const;
};

/// Wrap x into [0,1). Exact for any representable x (floor-based).
double wrap_unit(double x);

/// integral over one period of (phi'(x))^2, for smooth potentials.
/// Periodic trapezoid, grid-doubled until the relative change is < 1e-10.
/// Throws AsymptoteInapplicableError when the potential has breakpoints.
double grad_squared_integral(const PeriodicPotential& phi);

} // namespace washboard

#endif
