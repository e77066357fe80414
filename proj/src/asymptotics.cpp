#include "washboard/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace washboard {

namespace {

struct Accumulator {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double e1_decay(double d) {
    if (d == 0.0) return 1.0;
    return -std::expm1(-d) / d;
}

// integral of e^{sign*phi} over one period at resolution n:
// spectral trapezoid for smooth phi, per-panel exponential fitting (exact for
// piecewise-linear phi) on the jump-aligned grid otherwise
double boltzmann_integral(const PeriodicPotential& phi, int sign, int n_request) {
    if (phi.is_smooth()) {
        const int n = n_request;
        std::vector<double> g(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = sign * phi(static_cast<double>(i) / n);
        const double m = *std::max_element(g.begin(), g.end());
        Accumulator acc;
        for (double v : g) acc.add(std::exp(v - m));
        return std::exp(m) * acc.sum / n;
    }
    const int n = detail::snap_grid(n_request, phi.grid_denominator());
    const double dx = 1.0 / n;
    std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double x0 = static_cast<double>(i) / n;
        const double x1 = static_cast<double>(i + 1) / n;
        a[static_cast<std::size_t>(i)] = sign * phi.value_right(x0);
        b[static_cast<std::size_t>(i)] = sign * phi.value_left(x1);
        m = std::max(m, std::max(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)]));
    }
    Accumulator acc;
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        acc.add(std::exp(std::max(a[k], b[k]) - m) * e1_decay(std::abs(b[k] - a[k])));
    }
    return std::exp(m) * dx * acc.sum;
}

// E2(z) = integral over [0,1] of sigma * e^{z*sigma}
double e2_of(double z) { return detail::e2(z); }

double a1_at(const PeriodicPotential& phi, int n_request) {
    if (phi.is_smooth()) {
        const int n = n_request;
        const auto ws = fourier_moment_weights(n);
        std::vector<double> p(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = phi(static_cast<double>(i) / n);
        const double mx = *std::max_element(p.begin(), p.end());
        std::vector<double> e(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i)] = std::exp(p[static_cast<std::size_t>(i)] - mx);
        Accumulator outer;
        for (int i = 0; i < n; ++i) {
            Accumulator inner;
            for (int j = 0; j < n; ++j)
                inner.add(ws[static_cast<std::size_t>(j)] * e[static_cast<std::size_t>((i + j) % n)]);
            outer.add(std::exp(mx - p[static_cast<std::size_t>(i)]) * inner.sum);
        }
        return outer.sum / n;
    }
    const int n = detail::snap_grid(n_request, phi.grid_denominator());
    const double dx = 1.0 / n;
    std::vector<double> pr(static_cast<std::size_t>(n)), pl(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        pr[static_cast<std::size_t>(i)] = phi.value_right(static_cast<double>(i) / n);
        pl[static_cast<std::size_t>(i)] = phi.value_left(static_cast<double>(i) / n);
    }
    const double mx = *std::max_element(pr.begin(), pr.end());
    // panel m: endpoint logs phi_r(m), phi_l(m+1); weight s within the panel
    std::vector<double> t1(static_cast<std::size_t>(n)), t2(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double av = pr[k];
        const double bv = pl[static_cast<std::size_t>((i + 1) % n)];
        const double beta = bv - av;
        t1[k] = std::exp(std::max(av, bv) - mx) * e1_decay(std::abs(beta));
        t2[k] = (beta <= 0.0) ? std::exp(av - mx) * e2_of(beta)
                              : std::exp(bv - mx) * (e1_decay(beta) - e2_of(-beta));
    }
    const bool two = pr != pl;
    Accumulator outer;
    for (int i = 0; i < n; ++i) {
        Accumulator inner;
        for (int j = 0; j < n; ++j) {
            const std::size_t m = static_cast<std::size_t>((i + j) % n);
            const double sj = static_cast<double>(j) * dx;
            inner.add(sj * dx * t1[m] + dx * dx * t2[m]);
        }
        const std::size_t k = static_cast<std::size_t>(i);
        double v = std::exp(mx - pr[k]) * inner.sum;
        if (two) v = 0.5 * (v + std::exp(mx - pl[k]) * inner.sum);
        outer.add(v);
    }
    return outer.sum / n;
}

} // namespace

SmallForceCoefficients small_f_coefficients(const PeriodicPotential& phi,
                                            const QuadratureConfig& cfg) {
    cfg.validate();
    const int order = phi.is_smooth() ? 0 : 2;
    const auto a0r = refine_until_converged(
        [&phi](int n) { return boltzmann_integral(phi, -1, n) * boltzmann_integral(phi, +1, n); },
        cfg, order);
    const auto a1r =
        refine_until_converged([&phi](int n) { return a1_at(phi, n); }, cfg, order);
    SmallForceCoefficients c;
    c.a0 = a0r.value;
    c.a1 = a1r.value;
    c.ratio = c.a1 / c.a0;
    return c;
}

ExpansionResult small_f_expansion(const SmallForceCoefficients& c, double f) {
    const double slope = c.ratio - 0.5;
    ExpansionResult r;
    r.V = f / c.a0 * (1.0 + f * slope);
    r.zeta_eff = c.a0 * (1.0 - f * slope);
    r.D_eff = (1.0 + f * slope) / c.a0;
    r.einstein_product = 1.0;
    return r;
}

ExpansionResult large_f_expansion(const PeriodicPotential& phi, double f,
                                  const QuadratureConfig& cfg) {
    cfg.validate();
    if (!phi.is_smooth())
        throw AsymptoteInapplicableError("large-f expansion needs a smooth potential");
    if (!(f > 0.0)) throw DomainError("large-f expansion needs f > 0");
    const double g = grad_squared_integral(phi);
    ExpansionResult r;
    r.V = f * (1.0 - g / (f * f));
    r.zeta_eff = 1.0 + g / (f * f);
    r.D_eff = 1.0 + 3.0 * g / (f * f);
    r.einstein_product = 1.0 + 4.0 * g / (f * f);
    return r;
}

MinDiffusionResult find_min_diffusion(const PeriodicPotential& phi, double f_lo, double f_hi,
                                      const QuadratureConfig& cfg) {
    cfg.validate();
    if (!(f_hi > f_lo)) throw DomainError("find_min_diffusion: empty bracket");
    auto d_eff = [&phi, &cfg](double f) {
        return compute_diffusion(DimensionlessSystem{phi, f}, cfg).D_eff;
    };

    constexpr int kScan = 33;
    std::vector<double> fs(kScan), ds(kScan);
    for (int i = 0; i < kScan; ++i) {
        fs[static_cast<std::size_t>(i)] = f_lo + (f_hi - f_lo) * i / (kScan - 1);
        ds[static_cast<std::size_t>(i)] = d_eff(fs[static_cast<std::size_t>(i)]);
    }
    const auto min_it = std::min_element(ds.begin(), ds.end());
    const int k = static_cast<int>(min_it - ds.begin());

    const double scale = std::max(std::abs(*min_it), 1e-300);
    const double flat_tol = 1e-12 * scale;
    bool unimodal = true;
    for (int i = 1; i <= k; ++i)
        if (ds[static_cast<std::size_t>(i)] > ds[static_cast<std::size_t>(i - 1)] + flat_tol) unimodal = false;
    for (int i = k + 1; i < kScan; ++i)
        if (ds[static_cast<std::size_t>(i)] < ds[static_cast<std::size_t>(i - 1)] - flat_tol) unimodal = false;
    const double spread = *std::max_element(ds.begin(), ds.end()) - *min_it;
    if (spread < 1e-13 * scale) unimodal = false;  // flat profile (e.g. free particle)

    MinDiffusionResult out;
    out.inv_a0 = 1.0 / small_f_coefficients(phi, cfg).a0;
    if (!unimodal) {
        out.unimodal = false;
        out.f_star = fs[static_cast<std::size_t>(k)];
        out.D_min = ds[static_cast<std::size_t>(k)];
        return out;
    }

    // golden-section inside the bracketing neighbors
    double a = fs[static_cast<std::size_t>(std::max(0, k - 1))];
    double b = fs[static_cast<std::size_t>(std::min(kScan - 1, k + 1))];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double d1 = d_eff(x1), d2 = d_eff(x2);
    for (int it = 0; it < 80 && (b - a) > 1e-8 * std::max(1.0, std::abs(b) + std::abs(a)); ++it) {
        if (d1 <= d2) {
            b = x2;
            x2 = x1;
            d2 = d1;
            x1 = b - invphi * (b - a);
            d1 = d_eff(x1);
        } else {
            a = x1;
            x1 = x2;
            d1 = d2;
            x2 = a + invphi * (b - a);
            d2 = d_eff(x2);
        }
    }
    out.unimodal = true;
    out.f_star = (d1 <= d2) ? x1 : x2;
    out.D_min = std::min(d1, d2);
    return out;
}

} // namespace washboard
