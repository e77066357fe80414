#include "washboard/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace washboard {

namespace {

constexpr double kLogDoubleMax = 709.0;
constexpr double kMaxExponentSpread = 1400.0;

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

/// Grid field with one-sided limit streams; left aliases right when the
/// integrands are continuous.
struct Field {
    std::vector<double> right;
    std::vector<double> left;
    bool two_sided = false;

    double mean_at(std::size_t i) const {
        return two_sided ? 0.5 * (right[i] + left[i]) : right[i];
    }
};

double field_mean(const Field& g) {
    Accumulator acc;
    for (std::size_t i = 0; i < g.right.size(); ++i) acc.add(g.mean_at(i));
    return acc.sum / static_cast<double>(g.right.size());
}

CellGrid field_to_grid(const Field& g) {
    const int n = static_cast<int>(g.right.size());
    CellGrid out(n);
    for (int i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i)] = g.mean_at(static_cast<std::size_t>(i));
    return out;
}

/// Fixed-resolution assembly of the w0/w1/reverse kernels for one system.
/// Smooth potentials use the Fourier product weights (exact e^{-fs} factor
/// against the trig interpolant); potentials with breakpoints use per-panel
/// exponential fitting on the jump-aligned grid (exact when the log of the
/// integrand is piecewise linear, e.g. Case-C / sawtooth w0).
class GridEngine {
public:
    GridEngine(const DimensionlessSystem& sys, int n_request)
        : f_(sys.f), smooth_(sys.phi.is_smooth()) {
        n_ = smooth_ ? n_request : detail::snap_grid(n_request, sys.phi.grid_denominator());
        const auto& phi = sys.phi;
        phi_r_.resize(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i)
            phi_r_[static_cast<std::size_t>(i)] = phi.value_right(static_cast<double>(i) / n_);
        if (!smooth_) {
            phi_l_.resize(static_cast<std::size_t>(n_));
            for (int i = 0; i < n_; ++i)
                phi_l_[static_cast<std::size_t>(i)] = phi.value_left(static_cast<double>(i) / n_);
            two_sided_ = phi_l_ != phi_r_;
        }
        const auto [mn, mx] = std::minmax_element(phi_r_.begin(), phi_r_.end());
        if (*mx - *mn + std::abs(f_) > kMaxExponentSpread)
            throw DynamicRangeError("transport: potential/force exponent spread exceeds 1400");
        if (smooth_) {
            omega_ = fourier_product_weights(n_, f_);
        } else {
            // c_j = e^{-f s_j} relative to its own maximum
            cshift_ = std::max(0.0, -f_ * (n_ - 1.0) / n_);
            cj_.resize(static_cast<std::size_t>(n_));
            for (int j = 0; j < n_; ++j)
                cj_[static_cast<std::size_t>(j)] = std::exp(-f_ * static_cast<double>(j) / n_ - cshift_);
        }
    }

    int n() const { return n_; }

    /// Forward kernel: out[i] = integral over s of
    ///   amp(x_i+s) * exp(phi(x_i+s) - phi(x_i) - f s),
    /// where log_amp supplies log(amp) streams (empty -> amp == 1).
    Field forward(const Field* log_amp) const {
        return smooth_ ? forward_smooth(log_amp) : forward_fitted(log_amp);
    }

    /// Reverse kernel: out[i] = integral over s of exp(phi(x_i) - phi(x_i-s) - f s).
    Field reverse() const { return smooth_ ? reverse_smooth() : reverse_fitted(); }

    bool two_sided() const { return two_sided_; }

private:
    std::size_t idx(long i) const {
        long m = i % n_;
        if (m < 0) m += n_;
        return static_cast<std::size_t>(m);
    }

    Field forward_smooth(const Field* log_amp) const {
        const std::size_t n = static_cast<std::size_t>(n_);
        std::vector<double> g(n);
        for (std::size_t m = 0; m < n; ++m)
            g[m] = phi_r_[m] + (log_amp ? log_amp->right[m] : 0.0);
        const double gmax = *std::max_element(g.begin(), g.end());
        std::vector<double> e(n);
        for (std::size_t m = 0; m < n; ++m) e[m] = std::exp(g[m] - gmax);
        Field out;
        out.right.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            Accumulator acc;
            for (std::size_t j = 0; j < n; ++j) acc.add(omega_[j] * e[idx(static_cast<long>(i + j))]);
            out.right[i] = finish_exp(gmax - phi_r_[i], acc.sum);
        }
        return out;
    }

    Field reverse_smooth() const {
        const std::size_t n = static_cast<std::size_t>(n_);
        const double nmax = -*std::min_element(phi_r_.begin(), phi_r_.end());
        std::vector<double> e(n);
        for (std::size_t m = 0; m < n; ++m) e[m] = std::exp(-phi_r_[m] - nmax);
        Field out;
        out.right.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            Accumulator acc;
            for (std::size_t j = 0; j < n; ++j)
                acc.add(omega_[j] * e[idx(static_cast<long>(i) - static_cast<long>(j))]);
            out.right[i] = finish_exp(phi_r_[i] + nmax, acc.sum);
        }
        return out;
    }

    Field forward_fitted(const Field* log_amp) const {
        const std::size_t n = static_cast<std::size_t>(n_);
        const double dx = 1.0 / n_;
        // panel m spans [s_m, s_{m+1}] relative to the moving point; its log
        // endpoints are g_right(m) and g_left(m+1) - f*dx
        std::vector<double> gr(n), gl(n);
        for (std::size_t m = 0; m < n; ++m) {
            const double amp_r = log_amp ? log_amp->right[m] : 0.0;
            const double amp_l =
                log_amp ? (log_amp->two_sided ? log_amp->left[m] : log_amp->right[m]) : 0.0;
            gr[m] = phi_r_[m] + amp_r;
            gl[m] = (phi_l_.empty() ? phi_r_[m] : phi_l_[m]) + amp_l;
        }
        std::vector<double> hp(n), hm(n);  // panel peak exponent, panel value
        double hshift = -std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < n; ++m) {
            const double a = gr[m];
            const double b = gl[(m + 1) % n] - f_ * dx;
            hp[m] = std::max(a, b);
            hm[m] = std::abs(b - a);
            hshift = std::max(hshift, hp[m]);
        }
        std::vector<double> pv(n);
        for (std::size_t m = 0; m < n; ++m) pv[m] = std::exp(hp[m] - hshift) * e1_decay(hm[m]);
        Field out;
        out.right.resize(n);
        if (two_sided_) out.left.resize(n), out.two_sided = true;
        for (std::size_t i = 0; i < n; ++i) {
            Accumulator acc;
            for (std::size_t j = 0; j < n; ++j) acc.add(cj_[j] * pv[idx(static_cast<long>(i + j))]);
            const double s = dx * acc.sum;
            out.right[i] = finish_exp(hshift + cshift_ - phi_r_[i], s);
            if (two_sided_) out.left[i] = finish_exp(hshift + cshift_ - phi_l_[i], s);
        }
        return out;
    }

    Field reverse_fitted() const {
        const std::size_t n = static_cast<std::size_t>(n_);
        const double dx = 1.0 / n_;
        // panel j at outer i spans nodes (i-j, i-j-1); endpoint logs are
        // -phi_left(i-j) and -phi_right(i-j-1) - f*dx
        std::vector<double> hp(n), hm(n);
        double hshift = -std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < n; ++m) {
            const double pl = phi_l_.empty() ? phi_r_[m] : phi_l_[m];
            const double a = -pl;
            const double b = -phi_r_[idx(static_cast<long>(m) - 1)] - f_ * dx;
            hp[m] = std::max(a, b);
            hm[m] = std::abs(b - a);
            hshift = std::max(hshift, hp[m]);
        }
        std::vector<double> pv(n);
        for (std::size_t m = 0; m < n; ++m) pv[m] = std::exp(hp[m] - hshift) * e1_decay(hm[m]);
        Field out;
        out.right.resize(n);
        if (two_sided_) out.left.resize(n), out.two_sided = true;
        for (std::size_t i = 0; i < n; ++i) {
            Accumulator acc;
            for (std::size_t j = 0; j < n; ++j)
                acc.add(cj_[j] * pv[idx(static_cast<long>(i) - static_cast<long>(j))]);
            const double s = dx * acc.sum;
            out.right[i] = finish_exp(hshift + cshift_ + phi_r_[i], s);
            if (two_sided_) out.left[i] = finish_exp(hshift + cshift_ + phi_l_[i], s);
        }
        return out;
    }

    static double finish_exp(double log_prefactor, double stabilized_sum) {
        if (stabilized_sum <= 0.0)
            throw InternalConsistencyError("transport kernel produced a non-positive integral");
        if (log_prefactor + std::log(stabilized_sum) > kLogDoubleMax)
            throw DynamicRangeError("transport kernel overflows double range");
        return std::exp(log_prefactor) * stabilized_sum;
    }

    int n_ = 0;
    double f_ = 0.0;
    bool smooth_ = true;
    bool two_sided_ = false;
    std::vector<double> phi_r_, phi_l_;
    std::vector<double> omega_;  // smooth family
    std::vector<double> cj_;     // breakpoint family
    double cshift_ = 0.0;
};

struct KernelBundle {
    Field w0, w1, rev;
    double M0 = 0.0, M1a = 0.0, M1b = 0.0;
    int n = 0;
};

KernelBundle assemble(const DimensionlessSystem& sys, int n_request, bool with_w1) {
    GridEngine eng(sys, n_request);
    KernelBundle kb;
    kb.n = eng.n();
    kb.w0 = eng.forward(nullptr);
    kb.M0 = field_mean(kb.w0);
    if (!with_w1) return kb;
    Field logw0sq;
    logw0sq.right.resize(kb.w0.right.size());
    for (std::size_t m = 0; m < kb.w0.right.size(); ++m)
        logw0sq.right[m] = 2.0 * std::log(kb.w0.right[m]);
    if (kb.w0.two_sided) {
        logw0sq.left.resize(kb.w0.left.size());
        for (std::size_t m = 0; m < kb.w0.left.size(); ++m)
            logw0sq.left[m] = 2.0 * std::log(kb.w0.left[m]);
        logw0sq.two_sided = true;
    }
    kb.w1 = eng.forward(&logw0sq);
    kb.M1a = field_mean(kb.w1);
    kb.rev = eng.reverse();
    // reversed-shift route: integral of (w0(x))^2 * reverse(x)
    Field prod;
    prod.right.resize(kb.w0.right.size());
    for (std::size_t i = 0; i < prod.right.size(); ++i)
        prod.right[i] = kb.w0.right[i] * kb.w0.right[i] * kb.rev.right[i];
    if (kb.w0.two_sided) {
        prod.left.resize(kb.w0.left.size());
        for (std::size_t i = 0; i < prod.left.size(); ++i)
            prod.left[i] = kb.w0.left[i] * kb.w0.left[i] * kb.rev.left[i];
        prod.two_sided = true;
    }
    kb.M1b = field_mean(prod);
    return kb;
}

double one_minus_exp_neg(double f) { return -std::expm1(-f); }

/// Joint refinement of (M0, M1a, M1b) on the doubling ladder. Breakpoint
/// families carry a clean h^2 error expansion and get the Richardson
/// treatment; the smooth rules are spectral and are compared raw.
struct RefinedBundle {
    double M0 = 0.0, M1a = 0.0, M1b = 0.0;
    int n = 0;
    double achieved = 0.0;
};

RefinedBundle refine_bundle(const DimensionlessSystem& sys, const QuadratureConfig& cfg,
                            bool with_w1) {
    cfg.validate();
    const int order = sys.phi.is_smooth() ? 0 : 2;
    const int n_values = with_w1 ? 3 : 1;
    std::vector<std::vector<std::vector<double>>> rows(static_cast<std::size_t>(n_values));
    std::vector<double> prev_diag(static_cast<std::size_t>(n_values), 0.0);
    std::vector<double> diag(static_cast<std::size_t>(n_values), 0.0);
    int n = cfg.n_grid;
    int n_eff = 0;
    for (int k = 0; k <= cfg.max_refinements; ++k, n *= 2) {
        const KernelBundle kb = assemble(sys, n, with_w1);
        n_eff = kb.n;
        const double raw[3] = {kb.M0, kb.M1a, kb.M1b};
        double worst = 0.0;
        for (int q = 0; q < n_values; ++q) {
            auto& tab = rows[static_cast<std::size_t>(q)];
            std::vector<double> row(static_cast<std::size_t>(k) + 1);
            row[0] = raw[q];
            for (int j = 1; j <= k; ++j) {
                if (order > 0) {
                    const double denom = std::pow(2.0, order + j - 1) - 1.0;
                    row[static_cast<std::size_t>(j)] =
                        row[static_cast<std::size_t>(j - 1)] +
                        (row[static_cast<std::size_t>(j - 1)] -
                         tab.back()[static_cast<std::size_t>(j - 1)]) /
                            denom;
                } else {
                    row[static_cast<std::size_t>(j)] = row[0];
                }
            }
            diag[static_cast<std::size_t>(q)] = row.back();
            tab.push_back(std::move(row));
        }
        if (k > 0) {
            for (int q = 0; q < n_values; ++q) {
                const double scale = std::max(std::abs(diag[static_cast<std::size_t>(q)]), 1e-300);
                worst = std::max(worst, std::abs(diag[static_cast<std::size_t>(q)] -
                                                 prev_diag[static_cast<std::size_t>(q)]) /
                                            scale);
            }
            if (worst < cfg.rel_tol) return {diag[0], with_w1 ? diag[1] : 0.0,
                                             with_w1 ? diag[2] : 0.0, n_eff, worst};
        }
        prev_diag = diag;
    }
    throw NotConvergedError("transport quadrature not converged", prev_diag[0], diag[0]);
}

} // namespace

CellGrid compute_w0(const DimensionlessSystem& sys, const QuadratureConfig& cfg) {
    cfg.validate();
    return field_to_grid(assemble(sys, cfg.n_grid, false).w0);
}

VelocityResult compute_velocity(const DimensionlessSystem& sys, const QuadratureConfig& cfg) {
    const RefinedBundle rb = refine_bundle(sys, cfg, false);
    VelocityResult out;
    out.M0 = rb.M0;
    out.V = (sys.f == 0.0) ? 0.0 : one_minus_exp_neg(sys.f) / rb.M0;
    out.J0 = out.V;
    return out;
}

CellGrid compute_u0(const DimensionlessSystem& sys, const QuadratureConfig& cfg) {
    cfg.validate();
    const KernelBundle kb = assemble(sys, cfg.n_grid, false);
    CellGrid u0 = field_to_grid(kb.w0);
    // normalize on-grid so the discrete integral is exactly 1
    const double m0 = periodic_integral(u0);
    for (auto& v : u0.values) v /= m0;
    return u0;
}

CellGrid compute_w1(const DimensionlessSystem& sys, const CellGrid& w0,
                    const QuadratureConfig& cfg) {
    cfg.validate();
    GridEngine eng(sys, cfg.n_grid);
    if (w0.n != eng.n()) throw DomainError("compute_w1: w0 grid resolution mismatch");
    Field logw0sq;
    logw0sq.right.resize(static_cast<std::size_t>(w0.n));
    for (std::size_t m = 0; m < logw0sq.right.size(); ++m) {
        if (!(w0.values[m] > 0.0)) throw DomainError("compute_w1: w0 must be strictly positive");
        logw0sq.right[m] = 2.0 * std::log(w0.values[m]);
    }
    return field_to_grid(eng.forward(&logw0sq));
}

DualM1 compute_m1_dual(const DimensionlessSystem& sys, const QuadratureConfig& cfg) {
    const RefinedBundle rb = refine_bundle(sys, cfg, true);
    return {rb.M1a, rb.M1b};
}

TransportCoefficients compute_diffusion(const DimensionlessSystem& sys,
                                        const QuadratureConfig& cfg) {
    const RefinedBundle rb = refine_bundle(sys, cfg, true);
    const double scale = std::max(std::abs(rb.M1a), 1e-300);
    if (std::abs(rb.M1a - rb.M1b) / scale > 10.0 * cfg.rel_tol)
        throw InternalConsistencyError(
            "dual-form M1 mismatch: " + std::to_string(rb.M1a) + " vs " +
            std::to_string(rb.M1b) + " (quadrature misconfiguration)");
    TransportCoefficients tc;
    tc.M0 = rb.M0;
    tc.M1 = rb.M1a;
    tc.V = (sys.f == 0.0) ? 0.0 : one_minus_exp_neg(sys.f) / rb.M0;
    tc.J0 = tc.V;
    tc.D_eff = rb.M1a / (rb.M0 * rb.M0 * rb.M0);
    tc.zeta_eff = (sys.f == 0.0) ? rb.M0 : sys.f * rb.M0 / one_minus_exp_neg(sys.f);
    tc.quadrature_n = rb.n;
    tc.achieved_rel_err = rb.achieved;
    return tc;
}

namespace {

CellProfiles build_profiles(const DimensionlessSystem& sys, const QuadratureConfig& cfg,
                            double* c1_over_j0_out) {
    cfg.validate();
    const KernelBundle kb = assemble(sys, cfg.n_grid, true);
    CellProfiles p;
    p.n = kb.n;
    p.w0 = field_to_grid(kb.w0);
    p.u0 = p.w0;
    const double m0 = periodic_integral(p.u0);
    for (auto& v : p.u0.values) v /= m0;
    p.w1 = field_to_grid(kb.w1);

    // cumulative integral of u0: spectral for smooth grids, trapezoid otherwise
    if (sys.phi.is_smooth()) {
        p.u0_cum = CellGrid(p.n, detail::spectral_cumulative_integral(p.u0.values));
    } else {
        p.u0_cum = CellGrid(p.n);
        const double dx = 1.0 / p.n;
        Accumulator acc;
        for (int i = 1; i < p.n; ++i) {
            acc.add(0.5 * dx * (p.u0.values[static_cast<std::size_t>(i - 1)] +
                                p.u0.values[static_cast<std::size_t>(i)]));
            p.u0_cum.values[static_cast<std::size_t>(i)] = acc.sum;
        }
    }

    if (sys.f != 0.0) {
        const double M0 = m0;
        const double M1 = periodic_integral(p.w1);
        const double J0 = one_minus_exp_neg(sys.f) / M0;
        const double denom = M0 * M0 * M0 * J0;
        const std::size_t n = static_cast<std::size_t>(p.n);
        // The additive constant comes from the zero-mean condition. For
        // smooth potentials the cross term integrates to U(1)^2/2 = 1/2
        // exactly, reproducing the closed form M1/(M0^3 J0) + 1/2 to
        // quadrature accuracy. On jump-aligned grids the plain node mean of
        // u0*U is used instead, which zeroes the discrete mean of u1.
        double c1_over_j0;
        if (sys.phi.is_smooth()) {
            c1_over_j0 = 0.5 + M1 / denom;
        } else {
            Accumulator t;
            for (std::size_t i = 0; i < n; ++i) t.add(p.u0.values[i] * p.u0_cum.values[i]);
            c1_over_j0 = t.sum / p.n + M1 / denom;
        }
        if (c1_over_j0_out) *c1_over_j0_out = c1_over_j0;
        p.u1 = CellGrid(p.n);
        for (std::size_t i = 0; i < n; ++i)
            p.u1.values[i] = c1_over_j0 * p.u0.values[i] -
                             p.u0.values[i] * p.u0_cum.values[i] -
                             p.w1.values[i] / denom;
    }
    return p;
}

} // namespace

CellProfiles compute_profiles(const DimensionlessSystem& sys, const QuadratureConfig& cfg) {
    return build_profiles(sys, cfg, nullptr);
}

U1Result compute_u1(const DimensionlessSystem& sys, const QuadratureConfig& cfg) {
    if (sys.f == 0.0) throw DomainError("u1 undefined at zero force");
    U1Result out;
    const CellProfiles p = build_profiles(sys, cfg, &out.c1_over_J0);
    const double M0 = periodic_integral(p.w0);
    const double M1 = periodic_integral(p.w1);
    const double J0 = one_minus_exp_neg(sys.f) / M0;
    out.u1 = p.u1;
    out.flux_profile = CellGrid(p.n);
    const double base = M1 / (M0 * M0 * M0) + 0.5 * J0;
    for (int i = 0; i < p.n; ++i)
        out.flux_profile.values[static_cast<std::size_t>(i)] =
            base - J0 * p.u0_cum.values[static_cast<std::size_t>(i)];
    return out;
}

} // namespace washboard
