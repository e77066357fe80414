#ifndef WASHBOARD_FPE_HPP
#define WASHBOARD_FPE_HPP

#include <iosfwd>
#include <memory>

#include "washboard/quad.hpp"
#include "washboard/transport.hpp"

namespace washboard {

struct FpeConfig {
    int n = 256;           ///< cells per unit period
    double dt = 0.0;       ///< 0: automatic stable step (about 0.35/n^2)
    double t_final = 20.0;
    double slope_window = 0.5;  ///< trailing fraction of the horizon used for fits
    int record_stride = 0;      ///< steps between history records; 0: ~2000 records

    void validate() const;
};

/// Discretized moment densities on the unit cell. Values are samples at the
/// scheme's cell centers: i/n for smooth potentials (so the initial rho0 is
/// the transport u0 grid verbatim), (i+1/2)/n when the potential has jumps
/// (so no center sits on a discontinuity).
struct MomentState {
    int n = 0;
    double t = 0.0;
    CellGrid rho0, rho1, rho2;
    bool staggered = false;
};

struct MomentHistory {
    std::vector<double> t;
    std::vector<double> int_rho1;        ///< discrete integral of rho1
    std::vector<double> centered_second; ///< int rho2 - (int rho1)^2
    std::vector<double> lyapunov;        ///< E(t), only filled by decay runs
};

struct FpeEstimate {
    double V_fpe = 0.0;
    double Deff_fpe = 0.0;
};

struct FpeTransport {
    FpeEstimate estimate;
    MomentHistory history;
    MomentState final_state;
};

/// Conservative finite-volume propagator with exponential-fitted
/// (Scharfetter-Gummel-type) interface fluxes built from exact face
/// integrals of e^{phi - f x}; the sampled u0 is then a steady state of the
/// discrete operator to roundoff. Twisted wrap-around values close the
/// hierarchy: rho1(x+1) = rho1(x) - rho0(x) and
/// rho2(x+1) = rho2(x) - 2 rho1(x) + rho0(x), with the instantaneous rho0.
class MomentPropagator {
public:
    MomentPropagator(const DimensionlessSystem& sys, const FpeConfig& cfg);
    ~MomentPropagator();
    MomentPropagator(MomentPropagator&&) noexcept;

    MomentState initial() const;
    void advance(MomentState& state) const;  ///< one explicit step

    /// One step of p1 = rho1 - u0*J0*t: same flux and twist (with the fixed
    /// u0) plus the -J0*u0 source.
    void advance_p1(CellGrid& p1, double& t) const;

    /// One step of a pure rho0 field (used by the decay diagnostics).
    void advance_rho0(CellGrid& rho0) const;

    int n() const;
    double dt() const;
    bool staggered() const;
    const CellGrid& u0() const;  ///< initial (steady) folded density
    double j0() const;
    double center(int i) const;  ///< x-coordinate of cell i

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

MomentState init_state(const DimensionlessSystem& sys, const FpeConfig& cfg);

/// Single explicit step (convenience wrapper; builds the propagator anew).
MomentState step(const MomentState& state, const DimensionlessSystem& sys,
                 const FpeConfig& cfg);

/// Evolve the hierarchy to t_final and extract V and D_eff from the
/// long-time slopes.
FpeTransport run_moment_hierarchy(const DimensionlessSystem& sys, const FpeConfig& cfg);

/// Least-squares slopes over the trailing slope_window fraction of the
/// recorded history. Throws DomainError with fewer than 10 samples in the
/// window ("insufficient history").
FpeEstimate extract_transport(const MomentHistory& history, double slope_window);

/// Evolve p1 from 0 to t_end; returns the p1 field (which converges to u1).
CellGrid evolve_p1(const DimensionlessSystem& sys, const FpeConfig& cfg, double t_end);

/// Evolve rho0 = u0 * (1 + r0) and record E(t) = integral of u0 * r0^2 at
/// every step. The perturbation must satisfy integral(u0 * r0) = 0 (use
/// recenter_perturbation); otherwise it is rejected.
MomentHistory lyapunov_decay_check(const DimensionlessSystem& sys, const CellGrid& r0,
                                   const FpeConfig& cfg);

/// Subtract the u0-weighted mean so the zero-mean constraint holds.
CellGrid recenter_perturbation(const CellGrid& u0, const CellGrid& r0);

/// CSV trace: t, int_rho1, centered_second_moment, E_lyapunov (blank fields
/// where a column was not recorded).
void write_trace_csv(std::ostream& os, const MomentHistory& history);

} // namespace washboard

#endif
