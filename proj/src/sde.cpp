#include "washboard/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace washboard {

namespace detail {

uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double t_quantile_975(int dof) {
    static constexpr double table[40] = {
        12.706205, 4.302653, 3.182446, 2.776445, 2.570582,
        2.446912,  2.364624, 2.306004, 2.262157, 2.228139,
        2.200985,  2.178813, 2.160369, 2.144787, 2.131450,
        2.119905,  2.109816, 2.100922, 2.093024, 2.085963,
        2.079614,  2.073873, 2.068658, 2.063899, 2.059539,
        2.055529,  2.051831, 2.048407, 2.045230, 2.042272,
        2.039513,  2.036933, 2.034515, 2.032245, 2.030108,
        2.028094,  2.026192, 2.024394, 2.022691, 2.021075};
    if (dof < 1) throw DomainError("t quantile needs dof >= 1");
    if (dof <= 40) return table[dof - 1];
    return 1.96;
}

} // namespace detail

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Fully specified per-path normal generator (documented in SdeConfig).
class PathRng {
public:
    explicit PathRng(std::uint64_t path_seed) : gen_(path_seed) {}

    double uniform() { return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = kTwoPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Flattened drift f - phi'(x) for the hot loop.
class Drift {
public:
    Drift(const DimensionlessSystem& sys) : f_(sys.f) {
        const auto& phi = sys.phi;
        switch (phi.kind()) {
            case PotentialKind::Cosine:
                if (phi.amplitude() == 0.0) {
                    mode_ = Mode::Constant;
                } else {
                    mode_ = Mode::Cosine;
                    amp2pi_ = kTwoPi * phi.amplitude();
                    max_curvature_ = kTwoPi * kTwoPi * std::abs(phi.amplitude());
                }
                break;
            case PotentialKind::Sawtooth:
                mode_ = Mode::Sawtooth;
                alpha_ = phi.asymmetry();
                slope_up_ = phi.amplitude() / alpha_;
                slope_down_ = -phi.amplitude() / (1.0 - alpha_);
                break;
            case PotentialKind::PiecewiseConst:
                throw DomainError("drift undefined for piecewise-constant potential");
            case PotentialKind::Tabulated:
            case PotentialKind::Custom: {
                if (!phi.has_derivative())
                    throw DomainError("SDE oracle needs a potential with a derivative");
                mode_ = Mode::Table;
                table_.resize(kTable + 1);
                for (int i = 0; i <= kTable; ++i) {
                    const double x = static_cast<double>(i) / kTable;
                    table_[static_cast<std::size_t>(i)] = derivative_safe(phi, x);
                }
                for (int i = 0; i < kTable; ++i)
                    max_curvature_ = std::max(
                        max_curvature_,
                        std::abs(table_[static_cast<std::size_t>(i + 1)] -
                                 table_[static_cast<std::size_t>(i)]) * kTable);
                break;
            }
        }
    }

    double operator()(double x) const {
        switch (mode_) {
            case Mode::Constant:
                return f_;
            case Mode::Cosine:
                return f_ + amp2pi_ * std::sin(kTwoPi * wrap_unit(x));
            case Mode::Sawtooth: {
                const double u = wrap_unit(x);
                return f_ - (u < alpha_ ? slope_up_ : slope_down_);
            }
            case Mode::Table: {
                const double t = wrap_unit(x) * kTable;
                const int i = std::min(static_cast<int>(t), kTable - 1);
                const double frac = t - i;
                const double d = table_[static_cast<std::size_t>(i)] +
                                 frac * (table_[static_cast<std::size_t>(i + 1)] -
                                         table_[static_cast<std::size_t>(i)]);
                return f_ - d;
            }
        }
        return f_;
    }

    double max_curvature() const { return max_curvature_; }

private:
    enum class Mode { Constant, Cosine, Sawtooth, Table };
    static constexpr int kTable = 8192;

    static double derivative_safe(const PeriodicPotential& phi, double x) {
        try {
            return phi.derivative(x);
        } catch (const NonDifferentiableError&) {
            return phi.derivative(x + 1e-9);  // measure-zero kink, one-sided value
        }
    }

    Mode mode_ = Mode::Constant;
    double f_ = 0.0;
    double amp2pi_ = 0.0;
    double alpha_ = 0.5, slope_up_ = 0.0, slope_down_ = 0.0;
    double max_curvature_ = 0.0;
    std::vector<double> table_;
};

struct InverseCdf {
    std::vector<double> cum;  // size n+1, cum[0] = 0, cum[n] = 1
    int n = 0;

    explicit InverseCdf(const CellGrid& u0) : n(u0.n) {
        const double total = periodic_integral(u0);
        if (std::abs(total - 1.0) > 1e-6)
            throw DomainError("sample_from_u0: u0 is not normalized");
        cum.resize(static_cast<std::size_t>(n) + 1, 0.0);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = u0.values[static_cast<std::size_t>(i)];
            if (v < 0.0) throw DomainError("sample_from_u0: u0 must be nonnegative");
            acc += v / (total * n);
            cum[static_cast<std::size_t>(i) + 1] = acc;
        }
        cum[static_cast<std::size_t>(n)] = 1.0;
    }

    double operator()(double u) const {
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        int i = static_cast<int>(it - cum.begin()) - 1;
        i = std::clamp(i, 0, n - 1);
        const double lo = cum[static_cast<std::size_t>(i)];
        const double hi = cum[static_cast<std::size_t>(i) + 1];
        const double frac = (hi > lo) ? (u - lo) / (hi - lo) : 0.0;
        return (static_cast<double>(i) + frac) / n;
    }
};

double ls_slope(const std::vector<double>& t, const std::vector<double>& y, std::size_t first) {
    const std::size_t m = t.size() - first;
    double tm = 0.0, ym = 0.0;
    for (std::size_t k = first; k < t.size(); ++k) {
        tm += t[k];
        ym += y[k];
    }
    tm /= static_cast<double>(m);
    ym /= static_cast<double>(m);
    double num = 0.0, den = 0.0;
    for (std::size_t k = first; k < t.size(); ++k) {
        num += (t[k] - tm) * (y[k] - ym);
        den += (t[k] - tm) * (t[k] - tm);
    }
    return num / den;
}

} // namespace

void SdeConfig::validate() const {
    if (!(dt > 0.0)) throw DomainError("SdeConfig: dt must be positive");
    if (!(t_final >= 100.0 * dt)) throw DomainError("SdeConfig: t_final must be >= 100*dt");
    if (n_paths < 100) throw DomainError("SdeConfig: n_paths must be >= 100");
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction <= 0.5))
        throw DomainError("SdeConfig: burn_in_fraction must lie in [0, 0.5]");
    if (n_batches < 10) throw DomainError("SdeConfig: need at least 10 batches");
    if (n_paths / n_batches < 2) throw DomainError("SdeConfig: too many batches for n_paths");
    if (n_snapshots < 20) throw DomainError("SdeConfig: need at least 20 snapshots");
}

std::vector<double> sample_from_u0(const CellGrid& u0, int count, std::uint64_t seed) {
    if (count < 0) throw DomainError("sample_from_u0: negative count");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    if (count == 0) return out;
    const InverseCdf icdf(u0);
    PathRng rng(detail::splitmix64(seed));
    for (int k = 0; k < count; ++k) out.push_back(icdf(rng.uniform()));
    return out;
}

SdeEstimate simulate_ensemble(const DimensionlessSystem& sys, const SdeConfig& cfg) {
    cfg.validate();
    const Drift drift(sys);
    const QuadratureConfig qcfg;
    const InverseCdf icdf(compute_u0(sys, qcfg));

    const long steps = std::lround(cfg.t_final / cfg.dt);
    const long stride = std::max<long>(1, steps / cfg.n_snapshots);
    const std::size_t n_rec = static_cast<std::size_t>(steps / stride) + 1;
    const double sqrt2dt = std::sqrt(2.0 * cfg.dt);

    // each path writes its own row; the reduction below is serial and in
    // path order, so results do not depend on the thread count or schedule
    std::vector<double> traj(static_cast<std::size_t>(cfg.n_paths) * n_rec);
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int n_threads = cfg.n_threads > 0 ? cfg.n_threads : std::max(1, hw);

    auto run_paths = [&](int p_begin, int p_end) {
        for (int p = p_begin; p < p_end; ++p) {
            PathRng rng(detail::splitmix64(cfg.seed +
                                           (static_cast<std::uint64_t>(p) + 1) *
                                               0x9E3779B97F4A7C15ULL));
            double x = icdf(rng.uniform());
            double* row = traj.data() + static_cast<std::size_t>(p) * n_rec;
            std::size_t rec = 0;
            row[rec++] = x;
            for (long s = 1; s <= steps; ++s) {
                x += drift(x) * cfg.dt + sqrt2dt * rng.normal();
                if (s % stride == 0) row[rec++] = x;
            }
        }
    };

    if (n_threads <= 1) {
        run_paths(0, cfg.n_paths);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int c = 0; c < n_threads; ++c) {
            const int b = static_cast<int>(static_cast<long>(cfg.n_paths) * c / n_threads);
            const int e = static_cast<int>(static_cast<long>(cfg.n_paths) * (c + 1) / n_threads);
            pool.emplace_back(run_paths, b, e);
        }
        for (auto& th : pool) th.join();
    }

    // batch-wise moment accumulation, serial in path order
    const int nb = cfg.n_batches;
    std::vector<double> bsum(static_cast<std::size_t>(nb) * n_rec, 0.0);
    std::vector<double> bsum2(static_cast<std::size_t>(nb) * n_rec, 0.0);
    std::vector<int> bcount(static_cast<std::size_t>(nb), 0);
    for (int p = 0; p < cfg.n_paths; ++p) {
        const int b = static_cast<int>(static_cast<long>(p) * nb / cfg.n_paths);
        ++bcount[static_cast<std::size_t>(b)];
        const double* row = traj.data() + static_cast<std::size_t>(p) * n_rec;
        double* s1 = bsum.data() + static_cast<std::size_t>(b) * n_rec;
        double* s2 = bsum2.data() + static_cast<std::size_t>(b) * n_rec;
        for (std::size_t r = 0; r < n_rec; ++r) {
            s1[r] += row[r];
            s2[r] += row[r] * row[r];
        }
    }

    std::vector<double> times(n_rec);
    for (std::size_t r = 0; r < n_rec; ++r)
        times[r] = static_cast<double>(r) * static_cast<double>(stride) * cfg.dt;
    std::size_t first = 0;
    while (first + 10 < n_rec && times[first] < cfg.burn_in_fraction * cfg.t_final) ++first;
    if (n_rec - first < 10) throw DomainError("SdeConfig: fit window shorter than 10 snapshots");

    auto moments = [&](const std::vector<int>& batches) {
        std::vector<double> mean(n_rec, 0.0), var(n_rec, 0.0);
        long n_tot = 0;
        for (int b : batches) n_tot += bcount[static_cast<std::size_t>(b)];
        for (std::size_t r = 0; r < n_rec; ++r) {
            double s1 = 0.0, s2 = 0.0;
            for (int b : batches) {
                s1 += bsum[static_cast<std::size_t>(b) * n_rec + r];
                s2 += bsum2[static_cast<std::size_t>(b) * n_rec + r];
            }
            mean[r] = s1 / static_cast<double>(n_tot);
            var[r] = (s2 - s1 * s1 / static_cast<double>(n_tot)) / static_cast<double>(n_tot - 1);
        }
        return std::pair{mean, var};
    };

    std::vector<int> all(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) all[static_cast<std::size_t>(b)] = b;
    const auto [mean_all, var_all] = moments(all);

    SdeEstimate est;
    est.V_hat = ls_slope(times, mean_all, first);
    est.Deff_hat = 0.5 * ls_slope(times, var_all, first);
    est.n_paths = cfg.n_paths;
    est.t_final = cfg.t_final;
    est.dt_stability_warning = cfg.dt * drift.max_curvature() > 0.5;

    std::vector<double> vb(static_cast<std::size_t>(nb)), db(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) {
        const auto [m_b, v_b] = moments({b});
        vb[static_cast<std::size_t>(b)] = ls_slope(times, m_b, first);
        db[static_cast<std::size_t>(b)] = 0.5 * ls_slope(times, v_b, first);
    }
    auto ci = [nb](const std::vector<double>& xs) {
        double m = 0.0;
        for (double v : xs) m += v;
        m /= static_cast<double>(nb);
        double s2 = 0.0;
        for (double v : xs) s2 += (v - m) * (v - m);
        s2 /= static_cast<double>(nb - 1);
        return detail::t_quantile_975(nb - 1) * std::sqrt(s2 / nb);
    };
    est.V_ci = ci(vb);
    est.Deff_ci = ci(db);
    return est;
}

} // namespace washboard
