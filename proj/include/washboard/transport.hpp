#ifndef WASHBOARD_TRANSPORT_HPP
#define WASHBOARD_TRANSPORT_HPP

#include "washboard/nondim.hpp"
#include "washboard/quad.hpp"

namespace washboard {

/// Unit-cell profiles of the transport computation. For potentials with
/// jumps, grid values at a discontinuity are the mean of the one-sided
/// limits (the aligned-trapezoid convention).
struct CellProfiles {
    int n = 0;
    CellGrid w0;      ///< w0(x): inner exponential integral
    CellGrid u0;      ///< steady state of the folded density, integral = 1
    CellGrid w1;      ///< second-order kernel
    CellGrid u1;      ///< steady profile of p1 (zero mean); needs f != 0
    CellGrid u0_cum;  ///< cumulative integral of u0 from 0 to x_i
};

struct TransportCoefficients {
    double V = 0.0;        ///< average velocity (dimensionless)
    double D_eff = 0.0;    ///< effective diffusion (dimensionless)
    double zeta_eff = 0.0; ///< effective drag f/V, -> M0 as f -> 0
    double J0 = 0.0;       ///< steady flux of u0 (equals V)
    double M0 = 0.0;
    double M1 = 0.0;
    int quadrature_n = 0;        ///< finest grid used
    double achieved_rel_err = 0.0;
};

struct VelocityResult {
    double V = 0.0;
    double J0 = 0.0;
    double M0 = 0.0;
};

struct U1Result {
    CellGrid u1;
    CellGrid flux_profile;  ///< M1/M0^3 + J0/2 - J0 * integral[0..x] u0
    double c1_over_J0 = 0.0;
};

/// w0(x) = integral over s of exp(phi(x+s) - phi(x) - f s), sampled at i/n.
CellGrid compute_w0(const DimensionlessSystem& sys, const QuadratureConfig& cfg);

/// M0 = integral of w0; V = J0 = (1 - e^{-f})/M0, exactly 0 at f = 0.
VelocityResult compute_velocity(const DimensionlessSystem& sys, const QuadratureConfig& cfg);

/// u0 = w0/M0, normalized so the discrete integral is exactly 1.
CellGrid compute_u0(const DimensionlessSystem& sys, const QuadratureConfig& cfg);

/// w1(x) = integral over s of (w0(x+s))^2 exp(phi(x+s) - phi(x) - f s).
CellGrid compute_w1(const DimensionlessSystem& sys, const CellGrid& w0,
                    const QuadratureConfig& cfg);

/// Full coefficient set. M1 is computed along two algebraically equal routes
/// (integral of w1, and the double integral with the reversed shift); they
/// must agree within 10 * rel_tol or an InternalConsistencyError is thrown.
TransportCoefficients compute_diffusion(const DimensionlessSystem& sys,
                                        const QuadratureConfig& cfg);

struct DualM1 {
    double from_w1 = 0.0;      ///< integral of w1(x)
    double from_reverse = 0.0; ///< double integral with the reversed shift
};

/// Both M1 routes, refined to cfg.rel_tol, without the consistency throw.
DualM1 compute_m1_dual(const DimensionlessSystem& sys, const QuadratureConfig& cfg);

/// Steady profile u1 of p1 = rho1 - u0*J0*t and its flux profile. The
/// additive constant is fixed so the discrete integral of u1 is exactly 0.
/// Throws DomainError at f = 0 (the profile divides by J0).
U1Result compute_u1(const DimensionlessSystem& sys, const QuadratureConfig& cfg);

/// All cell profiles on one grid (single resolution, no refinement).
CellProfiles compute_profiles(const DimensionlessSystem& sys, const QuadratureConfig& cfg);

} // namespace washboard

#endif
