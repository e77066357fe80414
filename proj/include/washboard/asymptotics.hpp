#ifndef WASHBOARD_ASYMPTOTICS_HPP
#define WASHBOARD_ASYMPTOTICS_HPP

#include "washboard/quad.hpp"
#include "washboard/transport.hpp"

namespace washboard {

/// Coefficients of the small-force expansion:
///   a0 = (integral of e^{-phi}) * (integral of e^{phi})
///   a1 = double integral of exp(phi(x+s) - phi(x)) * s
/// ratio = a1/a0 equals 1/2 exactly for even potentials.
struct SmallForceCoefficients {
    double a0 = 1.0;
    double a1 = 0.5;
    double ratio = 0.5;
};

struct ExpansionResult {
    double V = 0.0;
    double zeta_eff = 0.0;
    double D_eff = 0.0;
    double einstein_product = 0.0;
};

SmallForceCoefficients small_f_coefficients(const PeriodicPotential& phi,
                                            const QuadratureConfig& cfg);

/// First-order small-f expansions:
///   V      = (f/a0) (1 + f (a1/a0 - 1/2))
///   zeta   = a0 (1 + f (1/2 - a1/a0))
///   D_eff  = (1/a0)(1 + f (a1/a0 - 1/2))
/// einstein_product is 1 at this order.
ExpansionResult small_f_expansion(const SmallForceCoefficients& c, double f);

/// Large-f expansions with G = integral of (phi')^2:
///   V = f (1 - G/f^2), zeta = 1 + G/f^2, D_eff = 1 + 3G/f^2,
///   einstein_product = 1 + 4G/f^2.
/// Requires a smooth potential and f > 0.
ExpansionResult large_f_expansion(const PeriodicPotential& phi, double f,
                                  const QuadratureConfig& cfg);

struct MinDiffusionResult {
    double f_star = 0.0;
    double D_min = 0.0;
    double inv_a0 = 0.0;   ///< zero-force diffusion 1/a0, for comparison
    bool unimodal = true;  ///< false: grid-scan minimum returned with a flag
};

/// Scan D_eff(f) over [f_lo, f_hi]: 33-point bracketing grid scan followed by
/// golden-section refinement. A non-unimodal (or flat) profile returns the
/// grid-scan minimum with unimodal = false.
MinDiffusionResult find_min_diffusion(const PeriodicPotential& phi, double f_lo, double f_hi,
                                      const QuadratureConfig& cfg);

} // namespace washboard

#endif
