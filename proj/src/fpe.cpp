#include "washboard/fpe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace washboard {

namespace {

// 4-point Gauss-Legendre on [0,1]
constexpr double kGlx[4] = {0.06943184420297371, 0.33000947820757187,
                            0.66999052179242813, 0.93056815579702629};
constexpr double kGlw[4] = {0.17392742256872693, 0.32607257743127307,
                            0.32607257743127307, 0.17392742256872693};

struct Accumulator {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double grid_mean(const CellGrid& g) {
    Accumulator acc;
    for (double v : g.values) acc.add(v);
    return acc.sum / g.n;
}

} // namespace

void FpeConfig::validate() const {
    if (n < 16) throw DomainError("FpeConfig: n must be >= 16");
    if (!(t_final > 0.0)) throw DomainError("FpeConfig: t_final must be positive");
    if (dt != 0.0) {
        if (!(dt > 0.0)) throw DomainError("FpeConfig: dt must be positive");
        if (dt > 0.4 / (static_cast<double>(n) * n))
            throw DomainError("FpeConfig: dt violates the stability bound 0.4/n^2");
    }
    if (!(slope_window > 0.0 && slope_window <= 1.0))
        throw DomainError("FpeConfig: slope_window must lie in (0, 1]");
    if (record_stride < 0) throw DomainError("FpeConfig: record_stride must be >= 0");
}

struct MomentPropagator::Impl {
    int n = 0;
    double dx = 0.0;
    double dt = 0.0;
    bool staggered = false;
    double f = 0.0;
    // face i couples cells i and i+1: F_i = cl[i]*rho_i - cr[i]*rho_{i+1};
    // coefficients are periodic (the e^{f} factors of the wrap face cancel)
    std::vector<double> cl, cr;
    CellGrid u0;
    double j0 = 0.0;
    // scratch
    mutable std::vector<double> flux;
    mutable std::vector<double> src;

    double center(int i) const { return (static_cast<double>(i) + (staggered ? 0.5 : 0.0)) / n; }

    void build(const DimensionlessSystem& sys, const FpeConfig& cfg) {
        const auto& phi = sys.phi;
        f = sys.f;
        staggered = !phi.is_smooth();
        n = cfg.n;
        if (staggered) {
            n = detail::snap_grid(n, phi.grid_denominator());
        } else if (n & (n - 1)) {
            throw DomainError("FpeConfig: n must be a power of two for smooth potentials");
        }
        dx = 1.0 / n;

        auto psi = [&phi, this](double x) { return phi(wrap_unit(x)) - f * x; };

        cl.resize(static_cast<std::size_t>(n));
        cr.resize(static_cast<std::size_t>(n));
        flux.resize(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i < n; ++i) {
            const double a = center(i);
            const double b = a + dx;  // center(i+1), unwrapped past 1
            const double pa = psi(a);
            const double pb = psi(b);
            const double m = std::max(pa, pb);
            // exact face integral of e^{psi - m}; split at an interior jump
            double s = 0.0;
            double split = b;
            if (staggered) {
                // cell boundaries at multiples of 1/n can carry a jump
                const double node = std::ceil(a * n - 1e-9) / n;
                if (node > a + 1e-12 && node < b - 1e-12) split = node;
            }
            for (int piece = 0; piece < 2; ++piece) {
                const double lo = piece == 0 ? a : split;
                const double hi = piece == 0 ? split : b;
                if (hi - lo < 1e-15) continue;
                for (int q = 0; q < 4; ++q)
                    s += kGlw[q] * (hi - lo) * std::exp(psi(lo + kGlx[q] * (hi - lo)) - m);
                if (split == b) break;
            }
            cl[static_cast<std::size_t>(i)] = std::exp(pa - m) / s;
            cr[static_cast<std::size_t>(i)] = std::exp(pb - m) / s;
        }
        // per-cell outflow rate (cl of the right face, cr of the left face)
        double max_rate = 0.0;
        for (int i = 0; i < n; ++i) {
            const std::size_t prev = static_cast<std::size_t>((i + n - 1) % n);
            max_rate = std::max(max_rate, cl[static_cast<std::size_t>(i)] + cr[prev]);
        }
        // explicit Euler: dt * lambda_max <= 2, lambda_max <= 2*max_rate/dx
        const double dt_auto = std::min(0.35 * dx * dx, 0.7 * dx / max_rate);
        dt = (cfg.dt > 0.0) ? cfg.dt : dt_auto;
        if (dt > 0.95 * dx / max_rate)
            throw DomainError("FpeConfig: dt violates the flux stability bound");

        // initial folded density: the transport u0, sampled at the centers
        u0 = CellGrid(n);
        if (!staggered) {
            QuadratureConfig qcfg;
            qcfg.n_grid = n;
            u0 = compute_u0(sys, qcfg);
        } else {
            QuadratureConfig qcfg;  // scalar kernel is exact for aligned families
            for (int i = 0; i < n; ++i)
                u0.values[static_cast<std::size_t>(i)] =
                    exp_integral_shifted(sys.phi, f, center(i), +1, qcfg);
            const double m0 = grid_mean(u0);
            for (auto& v : u0.values) v /= m0;
        }
        const QuadratureConfig qdefault;
        j0 = compute_velocity(sys, qdefault).V;
    }

    // one conservative step of a moment field; ghosts carry the twist
    void sweep(std::vector<double>& rho, double ghost_left, double ghost_right,
               const std::vector<double>* source) const {
        const std::size_t un = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i + 1 < un; ++i)
            flux[i + 1] = cl[i] * rho[i] - cr[i] * rho[i + 1];
        flux[un] = cl[un - 1] * rho[un - 1] - cr[un - 1] * ghost_right;
        flux[0] = cl[un - 1] * ghost_left - cr[un - 1] * rho[0];
        const double r = dt / dx;
        for (std::size_t i = 0; i < un; ++i) {
            rho[i] -= r * (flux[i + 1] - flux[i]);
            if (source) rho[i] -= dt * (*source)[i];
        }
    }
};

MomentPropagator::MomentPropagator(const DimensionlessSystem& sys, const FpeConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
    cfg.validate();
    impl_->build(sys, cfg);
}

MomentPropagator::~MomentPropagator() = default;
MomentPropagator::MomentPropagator(MomentPropagator&&) noexcept = default;

MomentState MomentPropagator::initial() const {
    MomentState st;
    st.n = impl_->n;
    st.t = 0.0;
    st.staggered = impl_->staggered;
    st.rho0 = impl_->u0;
    st.rho1 = CellGrid(impl_->n);
    st.rho2 = CellGrid(impl_->n);
    return st;
}

void MomentPropagator::advance(MomentState& st) const {
    auto& r0 = st.rho0.values;
    auto& r1 = st.rho1.values;
    auto& r2 = st.rho2.values;
    const std::size_t last = static_cast<std::size_t>(impl_->n) - 1;
    // twist ghosts with the instantaneous rho0 (exact identities of the
    // period-indexed moments)
    const double g0l = r0[last];
    const double g0r = r0[0];
    const double g1l = r1[last] + r0[last];
    const double g1r = r1[0] - r0[0];
    const double g2l = r2[last] + 2.0 * r1[last] + r0[last];
    const double g2r = r2[0] - 2.0 * r1[0] + r0[0];
    impl_->sweep(r0, g0l, g0r, nullptr);
    impl_->sweep(r1, g1l, g1r, nullptr);
    impl_->sweep(r2, g2l, g2r, nullptr);
    st.t += impl_->dt;
}

void MomentPropagator::advance_p1(CellGrid& p1, double& t) const {
    const std::size_t last = static_cast<std::size_t>(impl_->n) - 1;
    auto& v = p1.values;
    const double gl = v[last] + impl_->u0.values[last];
    const double gr = v[0] - impl_->u0.values[0];
    // source J0 * u0 on the left-hand side of the p1 equation
    auto& src = impl_->src;
    src.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) src[i] = impl_->j0 * impl_->u0.values[i];
    impl_->sweep(v, gl, gr, &src);
    t += impl_->dt;
}

void MomentPropagator::advance_rho0(CellGrid& rho0) const {
    const std::size_t last = static_cast<std::size_t>(impl_->n) - 1;
    impl_->sweep(rho0.values, rho0.values[last], rho0.values[0], nullptr);
}

int MomentPropagator::n() const { return impl_->n; }
double MomentPropagator::dt() const { return impl_->dt; }
bool MomentPropagator::staggered() const { return impl_->staggered; }
const CellGrid& MomentPropagator::u0() const { return impl_->u0; }
double MomentPropagator::j0() const { return impl_->j0; }
double MomentPropagator::center(int i) const { return impl_->center(i); }

MomentState init_state(const DimensionlessSystem& sys, const FpeConfig& cfg) {
    return MomentPropagator(sys, cfg).initial();
}

MomentState step(const MomentState& state, const DimensionlessSystem& sys,
                 const FpeConfig& cfg) {
    MomentPropagator prop(sys, cfg);
    if (state.n != prop.n()) throw DomainError("step: state resolution mismatch");
    MomentState next = state;
    prop.advance(next);
    for (double v : next.rho0.values)
        if (!std::isfinite(v)) throw BlowUpError("moment state blew up", 0);
    return next;
}

FpeTransport run_moment_hierarchy(const DimensionlessSystem& sys, const FpeConfig& cfg) {
    MomentPropagator prop(sys, cfg);
    MomentState st = prop.initial();
    const long steps = std::lround(std::ceil(cfg.t_final / prop.dt()));
    const long stride =
        cfg.record_stride > 0 ? cfg.record_stride : std::max<long>(1, steps / 2000);

    FpeTransport out;
    auto record = [&]() {
        const double i1 = grid_mean(st.rho1);
        const double i2 = grid_mean(st.rho2);
        out.history.t.push_back(st.t);
        out.history.int_rho1.push_back(i1);
        out.history.centered_second.push_back(i2 - i1 * i1);
    };
    record();
    for (long s = 1; s <= steps; ++s) {
        prop.advance(st);
        if (s % stride == 0 || s == steps) {
            if (!std::isfinite(st.rho2.values[0]) || !std::isfinite(st.rho0.values[0]))
                throw BlowUpError("moment state blew up", s);
            record();
        }
    }
    out.estimate = extract_transport(out.history, cfg.slope_window);
    out.final_state = std::move(st);
    return out;
}

FpeEstimate extract_transport(const MomentHistory& history, double slope_window) {
    if (!(slope_window > 0.0 && slope_window <= 1.0))
        throw DomainError("extract_transport: slope_window must lie in (0, 1]");
    const std::size_t m = history.t.size();
    if (m < 2) throw DomainError("extract_transport: insufficient history");
    const double t_end = history.t.back();
    const double t_start = t_end * (1.0 - slope_window);
    std::size_t first = 0;
    while (first < m && history.t[first] < t_start) ++first;
    if (m - first < 10) throw DomainError("extract_transport: insufficient history");

    auto slope = [&](const std::vector<double>& y) {
        double tm = 0.0, ym = 0.0;
        const double cnt = static_cast<double>(m - first);
        for (std::size_t k = first; k < m; ++k) {
            tm += history.t[k];
            ym += y[k];
        }
        tm /= cnt;
        ym /= cnt;
        double num = 0.0, den = 0.0;
        for (std::size_t k = first; k < m; ++k) {
            num += (history.t[k] - tm) * (y[k] - ym);
            den += (history.t[k] - tm) * (history.t[k] - tm);
        }
        return num / den;
    };
    FpeEstimate est;
    est.V_fpe = slope(history.int_rho1);
    est.Deff_fpe = 0.5 * slope(history.centered_second);
    return est;
}

CellGrid evolve_p1(const DimensionlessSystem& sys, const FpeConfig& cfg, double t_end) {
    MomentPropagator prop(sys, cfg);
    CellGrid p1(prop.n());
    double t = 0.0;
    const long steps = std::lround(std::ceil(t_end / prop.dt()));
    for (long s = 0; s < steps; ++s) prop.advance_p1(p1, t);
    return p1;
}

CellGrid recenter_perturbation(const CellGrid& u0, const CellGrid& r0) {
    if (u0.n != r0.n) throw DomainError("recenter_perturbation: grid mismatch");
    Accumulator acc;
    for (int i = 0; i < u0.n; ++i)
        acc.add(u0.values[static_cast<std::size_t>(i)] * r0.values[static_cast<std::size_t>(i)]);
    const double mean = acc.sum / u0.n;  // u0 integrates to 1
    CellGrid out = r0;
    for (auto& v : out.values) v -= mean;
    return out;
}

MomentHistory lyapunov_decay_check(const DimensionlessSystem& sys, const CellGrid& r0,
                                   const FpeConfig& cfg) {
    MomentPropagator prop(sys, cfg);
    if (r0.n != prop.n()) throw DomainError("lyapunov_decay_check: perturbation grid mismatch");
    const CellGrid& u0 = prop.u0();
    {
        Accumulator acc;
        for (int i = 0; i < r0.n; ++i)
            acc.add(u0.values[static_cast<std::size_t>(i)] *
                    r0.values[static_cast<std::size_t>(i)]);
        double scale = 0.0;
        for (double v : r0.values) scale = std::max(scale, std::abs(v));
        if (std::abs(acc.sum / r0.n) > 1e-10 * std::max(scale, 1.0))
            throw DomainError("lyapunov_decay_check: perturbation violates the zero-mean "
                              "constraint; recenter it first");
    }
    CellGrid rho0(prop.n());
    for (int i = 0; i < prop.n(); ++i)
        rho0.values[static_cast<std::size_t>(i)] =
            u0.values[static_cast<std::size_t>(i)] *
            (1.0 + r0.values[static_cast<std::size_t>(i)]);

    MomentHistory hist;
    auto energy = [&]() {
        Accumulator acc;
        for (int i = 0; i < prop.n(); ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            const double r = rho0.values[k] / u0.values[k] - 1.0;
            acc.add(u0.values[k] * r * r);
        }
        return acc.sum / prop.n();
    };
    const long steps = std::lround(std::ceil(cfg.t_final / prop.dt()));
    hist.t.push_back(0.0);
    hist.lyapunov.push_back(energy());
    for (long s = 1; s <= steps; ++s) {
        prop.advance_rho0(rho0);
        hist.t.push_back(static_cast<double>(s) * prop.dt());
        hist.lyapunov.push_back(energy());
    }
    return hist;
}

void write_trace_csv(std::ostream& os, const MomentHistory& history) {
    os << "t,int_rho1,centered_second_moment,E_lyapunov\n";
    char buf[128];
    for (std::size_t k = 0; k < history.t.size(); ++k) {
        auto field = [&](const std::vector<double>& col) -> std::string {
            if (k >= col.size()) return "";
            std::snprintf(buf, sizeof buf, "%.12g", col[k]);
            return buf;
        };
        std::snprintf(buf, sizeof buf, "%.12g", history.t[k]);
        os << buf << ',' << field(history.int_rho1) << ',' << field(history.centered_second)
           << ',' << field(history.lyapunov) << '\n';
    }
}

} // namespace washboard
