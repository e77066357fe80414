#include "washboard/quad.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "washboard/detail/fft.hpp"

namespace washboard {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxExponentSpread = 1400.0;
constexpr double kLogDoubleMax = 709.0;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Kahan summation: reductions stay deterministic and accurate at large n.
struct Accumulator {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// (1 - e^{-d})/d for d >= 0; the monotone form of (e^z - 1)/z that never
// overflows. e^a * e1(b-a) == e^{max(a,b)} * e1_decay(|b-a|).
double e1_decay(double d) {
    if (d == 0.0) return 1.0;
    return -std::expm1(-d) / d;
}

} // namespace

void QuadratureConfig::validate() const {
    if (n_grid < 16 || !is_power_of_two(n_grid))
        throw DomainError("QuadratureConfig: n_grid must be a power of two >= 16");
    if (!(rel_tol > 0.0)) throw DomainError("QuadratureConfig: rel_tol must be positive");
    if (max_refinements < 0) throw DomainError("QuadratureConfig: max_refinements must be >= 0");
}

double periodic_integral(const CellGrid& g) {
    if (g.n <= 0 || g.values.size() != static_cast<std::size_t>(g.n))
        throw DomainError("periodic_integral: grid size mismatch");
    Accumulator acc;
    for (double v : g.values) acc.add(v);
    return acc.sum / g.n;
}

std::vector<double> fourier_product_weights(int n, double f) {
    if (!is_power_of_two(n)) throw DomainError("fourier_product_weights: n must be a power of two");
    if (f == 0.0) return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
    const double one_minus_emf = -std::expm1(-f);
    std::vector<std::complex<double>> gk(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const int kappa = detail::signed_frequency(k, n);
        const std::complex<double> denom(f, -kTwoPi * kappa);
        std::complex<double> g = one_minus_emf / denom;
        if (2 * k == n) g = std::complex<double>(g.real(), 0.0);  // shared +-Nyquist bin
        gk[static_cast<std::size_t>(k)] = g;
    }
    detail::fft(gk, -1);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = gk[static_cast<std::size_t>(j)].real() / n;
    return w;
}

std::vector<double> fourier_moment_weights(int n) {
    if (!is_power_of_two(n)) throw DomainError("fourier_moment_weights: n must be a power of two");
    std::vector<std::complex<double>> gk(static_cast<std::size_t>(n));
    gk[0] = 0.5;
    for (int k = 1; k < n; ++k) {
        if (2 * k == n) {
            gk[static_cast<std::size_t>(k)] = 0.0;
            continue;
        }
        const int kappa = detail::signed_frequency(k, n);
        gk[static_cast<std::size_t>(k)] = std::complex<double>(0.0, -1.0 / (kTwoPi * kappa));
    }
    detail::fft(gk, -1);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = gk[static_cast<std::size_t>(j)].real() / n;
    return w;
}

namespace detail {

double e1(double z) {
    if (z == 0.0) return 1.0;
    return std::expm1(z) / z;
}

double e2(double z) {
    if (std::abs(z) < 0.5) {
        // sum_k z^k / (k! (k+2))
        double pow_term = 1.0;  // z^k / k!
        double acc = 0.5;
        for (int k = 1; k < 26; ++k) {
            pow_term *= z / k;
            const double add = pow_term / (k + 2);
            acc += add;
            if (std::abs(add) < 1e-18 * std::abs(acc)) break;
        }
        return acc;
    }
    return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

int snap_grid(int n, int d) {
    if (d <= 1) return n;
    int m = (n + d - 1) / d;
    int p = 1;
    while (p < m) p *= 2;
    return d * p;
}

std::vector<double> spectral_cumulative_integral(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    auto c = real_dft_coefficients(v);
    std::vector<std::complex<double>> d(static_cast<std::size_t>(n), {0.0, 0.0});
    for (int k = 1; k < n; ++k) {
        if (2 * k == n) continue;  // Nyquist cosine integrates to zero at the nodes
        const int kappa = signed_frequency(k, n);
        d[static_cast<std::size_t>(k)] =
            c[static_cast<std::size_t>(k)] / std::complex<double>(0.0, kTwoPi * kappa);
    }
    fft(d, +1);
    const double mean = c[0].real();
    std::vector<double> u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        u[static_cast<std::size_t>(i)] =
            mean * static_cast<double>(i) / n + (d[static_cast<std::size_t>(i)].real() - d[0].real());
    return u;
}

std::vector<double> spectral_derivative(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    auto c = real_dft_coefficients(v);
    std::vector<std::complex<double>> d(static_cast<std::size_t>(n), {0.0, 0.0});
    for (int k = 1; k < n; ++k) {
        if (2 * k == n) continue;  // Nyquist derivative vanishes at the nodes
        const int kappa = signed_frequency(k, n);
        d[static_cast<std::size_t>(k)] =
            c[static_cast<std::size_t>(k)] * std::complex<double>(0.0, kTwoPi * kappa);
    }
    fft(d, +1);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(i)].real();
    return out;
}

} // namespace detail

namespace {

double exp_integral_smooth(const PeriodicPotential& phi, double f, double x, int sign, int n) {
    const auto w = fourier_product_weights(n, f);
    std::vector<double> g(static_cast<std::size_t>(n));
    const double phix = phi(x);
    for (int j = 0; j < n; ++j) {
        const double s = static_cast<double>(j) / n;
        g[static_cast<std::size_t>(j)] = (sign > 0) ? phi(x + s) - phix : phix - phi(x - s);
    }
    const auto [mn_it, mx_it] = std::minmax_element(g.begin(), g.end());
    const double spread = *mx_it - *mn_it + std::abs(f);
    if (spread > kMaxExponentSpread)
        throw DynamicRangeError("exp_integral_shifted: exponent spread exceeds 1400");
    const double m = *mx_it;
    Accumulator acc;
    for (int j = 0; j < n; ++j)
        acc.add(w[static_cast<std::size_t>(j)] * std::exp(g[static_cast<std::size_t>(j)] - m));
    if (m + std::log(std::max(acc.sum, std::numeric_limits<double>::min())) > kLogDoubleMax)
        throw DynamicRangeError("exp_integral_shifted: result overflows double range");
    return std::exp(m) * acc.sum;
}

double exp_integral_breakpoints(const PeriodicPotential& phi, double f, double x, int sign, int n,
                                bool split) {
    // offsets in s where the integrand is evaluated; jumps of phi are
    // inserted so each panel is smooth inside
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(n) + phi.breakpoints().size() + 1);
    for (int j = 0; j < n; ++j) t.push_back(static_cast<double>(j) / n);
    if (split) {
        for (double b : phi.breakpoints()) {
            const double off = (sign > 0) ? wrap_unit(b - x) : wrap_unit(x - b);
            t.push_back(off);
        }
    }
    t.push_back(1.0);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            t.end());
    if (t.back() < 1.0 - 1e-12) t.push_back(1.0);
    else t.back() = 1.0;

    const double phix = phi(x);
    const std::size_t m_panels = t.size() - 1;
    std::vector<double> la(m_panels), lb(m_panels), dt(m_panels);
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < m_panels; ++p) {
        const double s0 = t[p], s1 = t[p + 1];
        double a, b;
        if (sign > 0) {
            a = phi.value_right(x + s0) - phix - f * s0;
            b = phi.value_left(x + s1) - phix - f * s1;
        } else {
            a = phix - phi.value_left(x - s0) - f * s0;
            b = phix - phi.value_right(x - s1) - f * s1;
        }
        la[p] = a;
        lb[p] = b;
        dt[p] = s1 - s0;
        gmax = std::max(gmax, std::max(a, b));
        gmin = std::min(gmin, std::min(a, b));
    }
    if (gmax - gmin > kMaxExponentSpread)
        throw DynamicRangeError("exp_integral_shifted: exponent spread exceeds 1400");
    Accumulator acc;
    for (std::size_t p = 0; p < m_panels; ++p) {
        const double hi = std::max(la[p], lb[p]);
        acc.add(dt[p] * std::exp(hi - gmax) * e1_decay(std::abs(lb[p] - la[p])));
    }
    if (gmax + std::log(std::max(acc.sum, std::numeric_limits<double>::min())) > kLogDoubleMax)
        throw DynamicRangeError("exp_integral_shifted: result overflows double range");
    return std::exp(gmax) * acc.sum;
}

} // namespace

double exp_integral_shifted(const PeriodicPotential& phi, double f, double x, int sign,
                            const QuadratureConfig& cfg, bool split_at_breakpoints) {
    cfg.validate();
    if (sign != 1 && sign != -1) throw DomainError("exp_integral_shifted: sign must be +-1");
    if (!std::isfinite(f)) throw DomainError("exp_integral_shifted: f must be finite");
    if (phi.is_smooth()) return exp_integral_smooth(phi, f, x, sign, cfg.n_grid);
    const int n = detail::snap_grid(cfg.n_grid, phi.grid_denominator());
    return exp_integral_breakpoints(phi, f, x, sign, n, split_at_breakpoints);
}

Refined refine_until_converged(const std::function<double(int)>& computation,
                               const QuadratureConfig& cfg, int richardson_order) {
    cfg.validate();
    // rows of the Richardson tableau, eliminating orders p, p+1, ... along
    // the diagonal; with p = 0 the diagonal is just the raw sequence
    std::vector<std::vector<double>> rows;
    double prev_diag = 0.0;
    int n = cfg.n_grid;
    for (int k = 0; k <= cfg.max_refinements; ++k, n *= 2) {
        std::vector<double> row(static_cast<std::size_t>(k) + 1);
        row[0] = computation(n);
        if (richardson_order > 0) {
            for (int j = 1; j <= k; ++j) {
                const double denom = std::pow(2.0, richardson_order + j - 1) - 1.0;
                row[static_cast<std::size_t>(j)] =
                    row[static_cast<std::size_t>(j - 1)] +
                    (row[static_cast<std::size_t>(j - 1)] -
                     rows.back()[static_cast<std::size_t>(j - 1)]) /
                        denom;
            }
        } else {
            for (int j = 1; j <= k; ++j) row[static_cast<std::size_t>(j)] = row[0];
        }
        const double diag = row.back();
        if (k > 0) {
            const double scale = std::max(std::abs(diag), 1e-300);
            const double rel = std::abs(diag - prev_diag) / scale;
            if (rel < cfg.rel_tol) return {diag, rel, n};
        }
        prev_diag = diag;
        rows.push_back(std::move(row));
    }
    const double last = rows.back().back();
    const double before = rows.size() >= 2 ? rows[rows.size() - 2].back() : last;
    throw NotConvergedError("quadrature not converged after " +
                                std::to_string(cfg.max_refinements) + " refinements",
                            before, last);
}

} // namespace washboard
