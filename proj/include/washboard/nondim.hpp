#ifndef WASHBOARD_NONDIM_HPP
#define WASHBOARD_NONDIM_HPP

#include <functional>

#include "washboard/potential.hpp"

namespace washboard {

/// Dimensional description of the problem. Optional entry point: the rest of
/// the library consumes the dimensionless pair (phi, f) directly.
struct PhysicalParams {
    double L = 1.0;    ///< potential period (length)
    double D = 1.0;    ///< diffusion constant (length^2/time)
    double kBT = 1.0;  ///< thermal energy
    double f_dim = 0.0;
    std::function<double(double)> phi_dim;  ///< potential in energy units, period L
    std::function<double(double)> dphi_dim; ///< optional derivative
    std::vector<double> breakpoints_dim;    ///< discontinuities in [0, L)

    void validate() const;
};

/// The pair (phi, f) after rescaling x = L*x~, t = (L^2/D)*t~. Sole input to
/// all transport computations. Scale factors are kept so results can be
/// mapped back to dimensional units.
struct DimensionlessSystem {
    PeriodicPotential phi = PeriodicPotential::zero();
    double f = 0.0;
    double length_scale = 1.0;   ///< L
    double time_scale = 1.0;     ///< L^2/D
    double velocity_scale = 1.0; ///< D/L
    double diffusion_scale = 1.0;///< D
};

/// phi~(x~) = phi(L x~)/kBT, f~ = f L/kBT. The returned potential is checked
/// for period 1 at 64 probe points (tolerance 1e-12 relative to amplitude).
DimensionlessSystem nondimensionalize(const PhysicalParams& p);

/// Map dimensionless velocity/diffusion back: V = v~ D/L, D_eff = d~ D.
std::pair<double, double> redimensionalize(double v_tilde, double d_tilde,
                                           const PhysicalParams& p);

/// Probe-point periodicity check used by nondimensionalize; exposed for the
/// dimensionless entry path as well.
void check_unit_period(const PeriodicPotential& phi);

} // namespace washboard

#endif
