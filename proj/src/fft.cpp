#include "washboard/detail/fft.hpp"

#include <cmath>
#include <numbers>

namespace washboard::detail {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<std::complex<double>>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto u = a[i + j];
                const auto v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

void dft_direct(std::vector<std::complex<double>>& a, int sign) {
    const std::size_t n = a.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang =
                sign * 2.0 * std::numbers::pi * static_cast<double>(k * j % n) / static_cast<double>(n);
            acc += a[j] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    a = std::move(out);
}

} // namespace

void fft(std::vector<std::complex<double>>& a, int sign) {
    if (a.size() < 2) return;
    if (is_power_of_two(a.size()))
        fft_radix2(a, sign);
    else
        dft_direct(a, sign);
}

std::vector<std::complex<double>> real_dft_coefficients(const std::vector<double>& v) {
    std::vector<std::complex<double>> a(v.begin(), v.end());
    fft(a, -1);
    const double inv_n = 1.0 / static_cast<double>(v.size());
    for (auto& c : a) c *= inv_n;
    return a;
}

} // namespace washboard::detail
