#include "washboard/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "washboard/detail/fft.hpp"

namespace washboard {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBreakpointTol = 1e-12;

// Smallest q <= limit with |b*q - round(b*q)| < 1e-9, or 0 if none.
int rational_denominator(double b, int limit = 4096) {
    for (int q = 1; q <= limit; ++q) {
        const double bq = b * q;
        if (std::abs(bq - std::round(bq)) < 1e-9) return q;
    }
    return 0;
}

int alignment_denominator(const std::vector<double>& breakpoints) {
    long long d = 1;
    for (double b : breakpoints) {
        const int q = rational_denominator(b);
        if (q == 0)
            throw DomainError("breakpoint " + std::to_string(b) +
                              " is not commensurate with any uniform grid");
        d = std::lcm(d, static_cast<long long>(q));
        if (d > 1 << 20) throw DomainError("breakpoint denominators overflow grid alignment");
    }
    return static_cast<int>(d);
}

std::vector<double> normalized_breakpoints(std::vector<double> b) {
    for (auto& x : b) x = wrap_unit(x);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(),
                        [](double u, double v) { return std::abs(u - v) < kBreakpointTol; }),
            b.end());
    return b;
}

} // namespace

double wrap_unit(double x) {
    double u = x - std::floor(x);
    if (u >= 1.0) u = 0.0;  // x a hair below an integer can round up
    return u;
}

PeriodicPotential PeriodicPotential::cosine(double A) {
    PeriodicPotential p;
    p.kind_ = PotentialKind::Cosine;
    p.amplitude_ = A;
    return p;
}

PeriodicPotential PeriodicPotential::piecewise_const(double A) {
    PeriodicPotential p;
    p.kind_ = PotentialKind::PiecewiseConst;
    p.amplitude_ = A;
    p.breakpoints_ = {0.0, 0.5};
    p.grid_denominator_ = 2;
    return p;
}

PeriodicPotential PeriodicPotential::sawtooth(double A, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("sawtooth alpha must lie in (0,1)");
    PeriodicPotential p;
    p.kind_ = PotentialKind::Sawtooth;
    p.amplitude_ = A;
    p.alpha_ = alpha;
    p.breakpoints_ = {0.0, alpha};
    p.grid_denominator_ = alignment_denominator(p.breakpoints_);
    return p;
}

PeriodicPotential PeriodicPotential::tabulated(std::vector<double> samples,
                                               std::vector<double> breakpoints) {
    if (samples.size() < 16) throw DomainError("tabulated potential needs at least 16 samples");
    PeriodicPotential p;
    p.kind_ = PotentialKind::Tabulated;
    p.samples_ = std::move(samples);
    p.breakpoints_ = normalized_breakpoints(std::move(breakpoints));
    const int n = static_cast<int>(p.samples_.size());
    if (p.breakpoints_.empty()) {
        p.fourier_ = detail::real_dft_coefficients(p.samples_);
        p.grid_denominator_ = 1;
    } else {
        // linear interpolation kinks at every sample node
        p.grid_denominator_ = std::lcm(n, alignment_denominator(p.breakpoints_));
    }
    return p;
}

PeriodicPotential PeriodicPotential::custom(std::function<double(double)> value,
                                            std::function<double(double)> derivative,
                                            std::vector<double> breakpoints) {
    if (!value) throw DomainError("custom potential needs a value function");
    PeriodicPotential p;
    p.kind_ = PotentialKind::Custom;
    p.custom_value_ = std::move(value);
    p.custom_derivative_ = std::move(derivative);
    p.breakpoints_ = normalized_breakpoints(std::move(breakpoints));
    p.grid_denominator_ = p.breakpoints_.empty() ? 1 : alignment_denominator(p.breakpoints_);
    return p;
}

bool PeriodicPotential::near_breakpoint(double u) const {
    for (double b : breakpoints_) {
        if (std::abs(u - b) < kBreakpointTol) return true;
        if (std::abs(u - b - 1.0) < kBreakpointTol || std::abs(u - b + 1.0) < kBreakpointTol)
            return true;
    }
    return false;
}

double PeriodicPotential::tabulated_value(double u) const {
    const int n = static_cast<int>(samples_.size());
    if (!breakpoints_.empty()) {
        const double t = u * n;
        const int i = std::min(static_cast<int>(t), n - 1);
        const double frac = t - i;
        return samples_[i] + frac * (samples_[(i + 1) % n] - samples_[i]);
    }
    // trigonometric interpolation from DFT coefficients
    double acc = fourier_[0].real();
    const int half = n / 2;
    for (int k = 1; k < half; ++k) {
        const double ang = kTwoPi * k * u;
        acc += 2.0 * (fourier_[k].real() * std::cos(ang) - fourier_[k].imag() * std::sin(ang));
    }
    if (n % 2 == 0)
        acc += fourier_[half].real() * std::cos(kTwoPi * half * u);
    else {
        const double ang = kTwoPi * half * u;
        acc += 2.0 * (fourier_[half].real() * std::cos(ang) - fourier_[half].imag() * std::sin(ang));
    }
    return acc;
}

double PeriodicPotential::tabulated_derivative(double u) const {
    const int n = static_cast<int>(samples_.size());
    double acc = 0.0;
    const int half = n / 2;
    for (int k = 1; k < half; ++k) {
        const double ang = kTwoPi * k * u;
        acc += 2.0 * kTwoPi * k *
               (-fourier_[k].real() * std::sin(ang) - fourier_[k].imag() * std::cos(ang));
    }
    // the unpaired Nyquist cosine mode differentiates to a pure sine
    if (n % 2 == 0)
        acc += -fourier_[half].real() * kTwoPi * half * std::sin(kTwoPi * half * u);
    else {
        const double ang = kTwoPi * half * u;
        acc += 2.0 * kTwoPi * half *
               (-fourier_[half].real() * std::sin(ang) - fourier_[half].imag() * std::cos(ang));
    }
    return acc;
}

double PeriodicPotential::value_right(double x) const {
    const double u = wrap_unit(x);
    switch (kind_) {
        case PotentialKind::Cosine:
            return amplitude_ * std::cos(kTwoPi * u);
        case PotentialKind::PiecewiseConst:
            return (u < 0.5) ? -amplitude_ : amplitude_;
        case PotentialKind::Sawtooth:
            return (u <= alpha_) ? amplitude_ * u / alpha_
                                 : amplitude_ * (1.0 - u) / (1.0 - alpha_);
        case PotentialKind::Tabulated:
            return tabulated_value(u);
        case PotentialKind::Custom:
            return custom_value_(u);
    }
    return 0.0;
}

double PeriodicPotential::value_left(double x) const {
    const double u = wrap_unit(x);
    switch (kind_) {
        case PotentialKind::PiecewiseConst:
            if (std::abs(u) < kBreakpointTol) return amplitude_;
            if (std::abs(u - 0.5) < kBreakpointTol) return -amplitude_;
            return value_right(u);
        case PotentialKind::Custom:
            if (!breakpoints_.empty() && near_breakpoint(u))
                return custom_value_(wrap_unit(u - 1e-12));
            return custom_value_(u);
        default:
            return value_right(u);  // continuous families
    }
}

bool PeriodicPotential::has_derivative() const {
    switch (kind_) {
        case PotentialKind::PiecewiseConst:
            return false;
        case PotentialKind::Custom:
            return static_cast<bool>(custom_derivative_);
        case PotentialKind::Tabulated:
            return breakpoints_.empty();  // spectral derivative of smooth samples
        default:
            return true;
    }
}

double PeriodicPotential::derivative(double x) const {
    if (!has_derivative())
        throw NonDifferentiableError("potential has no derivative (non-differentiable family)");
    const double u = wrap_unit(x);
    if (near_breakpoint(u))
        throw NonDifferentiableError("potential is non-differentiable at x = " + std::to_string(u));
    switch (kind_) {
        case PotentialKind::Cosine:
            return -kTwoPi * amplitude_ * std::sin(kTwoPi * u);
        case PotentialKind::Sawtooth:
            return (u < alpha_) ? amplitude_ / alpha_ : -amplitude_ / (1.0 - alpha_);
        case PotentialKind::Tabulated:
            return tabulated_derivative(u);
        case PotentialKind::Custom:
            return custom_derivative_(u);
        default:
            return 0.0;
    }
}

nlohmann::json PeriodicPotential::to_json() const {
    switch (kind_) {
        case PotentialKind::Cosine:
            return {{"kind", "cosine"}, {"A", amplitude_}};
        case PotentialKind::PiecewiseConst:
            return {{"kind", "piecewise_const"}, {"A", amplitude_}};
        case PotentialKind::Sawtooth:
            return {{"kind", "sawtooth"}, {"A", amplitude_}, {"alpha", alpha_}};
        case PotentialKind::Tabulated:
            return {{"kind", "tabulated"}, {"samples", samples_}};
        case PotentialKind::Custom:
            throw DomainError("custom potentials have no JSON form");
    }
    return {};
}

PeriodicPotential PeriodicPotential::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw DomainError("potential spec must be an object with a \"kind\" key");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "cosine") return cosine(j.at("A").get<double>());
    if (kind == "piecewise_const") return piecewise_const(j.at("A").get<double>());
    if (kind == "sawtooth")
        return sawtooth(j.at("A").get<double>(), j.at("alpha").get<double>());
    if (kind == "tabulated") return tabulated(j.at("samples").get<std::vector<double>>());
    throw DomainError("unknown potential kind \"" + kind + "\"");
}

PeriodicPotential PeriodicPotential::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DomainError("potential spec is not valid JSON");
    return from_json(j);
}

double grad_squared_integral(const PeriodicPotential& phi) {
    if (!phi.is_smooth() || !phi.has_derivative())
        throw AsymptoteInapplicableError(
            "grad_squared_integral requires a smooth potential (no breakpoints)");
    auto at = [&phi](int n) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = phi.derivative(static_cast<double>(i) / n);
            acc += d * d;
        }
        return acc / n;
    };
    double prev = at(128);
    for (int n = 256; n <= 1 << 16; n *= 2) {
        const double cur = at(n);
        const double scale = std::max(std::abs(cur), 1e-300);
        if (std::abs(cur - prev) / scale < 1e-10) return cur;
        prev = cur;
    }
    return prev;
}

} // namespace washboard
