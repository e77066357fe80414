#include "washboard/nondim.hpp"

#include <algorithm>
#include <cmath>

namespace washboard {

void PhysicalParams::validate() const {
    if (!(L > 0.0)) throw DomainError("PhysicalParams: L must be positive");
    if (!(D > 0.0)) throw DomainError("PhysicalParams: D must be positive");
    if (!(kBT > 0.0)) throw DomainError("PhysicalParams: kBT must be positive");
    if (!std::isfinite(f_dim)) throw DomainError("PhysicalParams: force must be finite");
    if (phi_dim) {
        // probe the declared period
        double amp = 0.0;
        for (int i = 0; i < 64; ++i) amp = std::max(amp, std::abs(phi_dim(L * i / 64.0)));
        const double tol = 1e-12 * std::max(amp, 1.0);
        for (int i = 0; i < 64; ++i) {
            const double x = L * i / 64.0;
            if (std::abs(phi_dim(x + L) - phi_dim(x)) > tol)
                throw DomainError("PhysicalParams: phi_dim is not periodic with period L");
        }
    }
}

void check_unit_period(const PeriodicPotential& phi) {
    double amp = 0.0;
    for (int i = 0; i < 64; ++i) amp = std::max(amp, std::abs(phi(i / 64.0)));
    const double tol = 1e-12 * std::max(amp, 1.0);
    for (int i = 0; i < 64; ++i) {
        const double x = i / 64.0;
        if (std::abs(phi(x + 1.0) - phi(x)) > tol)
            throw DomainError("potential is not periodic with period 1");
    }
}

DimensionlessSystem nondimensionalize(const PhysicalParams& p) {
    p.validate();
    DimensionlessSystem sys;
    sys.f = p.f_dim * p.L / p.kBT;
    sys.length_scale = p.L;
    sys.time_scale = p.L * p.L / p.D;
    sys.velocity_scale = p.D / p.L;
    sys.diffusion_scale = p.D;
    if (p.phi_dim) {
        const double L = p.L;
        const double kBT = p.kBT;
        auto value = [fn = p.phi_dim, L, kBT](double u) { return fn(L * u) / kBT; };
        std::function<double(double)> deriv;
        if (p.dphi_dim)
            deriv = [fn = p.dphi_dim, L, kBT](double u) { return fn(L * u) * L / kBT; };
        std::vector<double> bps;
        bps.reserve(p.breakpoints_dim.size());
        for (double b : p.breakpoints_dim) bps.push_back(b / L);
        sys.phi = PeriodicPotential::custom(value, deriv, bps);
    } else {
        sys.phi = PeriodicPotential::zero();
    }
    check_unit_period(sys.phi);
    return sys;
}

std::pair<double, double> redimensionalize(double v_tilde, double d_tilde,
                                           const PhysicalParams& p) {
    p.validate();
    return {v_tilde * p.D / p.L, d_tilde * p.D};
}

} // namespace washboard
