#ifndef WASHBOARD_DETAIL_FFT_HPP
#define WASHBOARD_DETAIL_FFT_HPP

#include <complex>
#include <vector>

namespace washboard::detail {

/// In-place complex FFT (forward: sign = -1, inverse: sign = +1, unscaled).
/// Radix-2 for powers of two, O(n^2) DFT fallback otherwise.
void fft(std::vector<std::complex<double>>& a, int sign);

/// DFT coefficients c_k = (1/n) sum_j v_j exp(-2*pi*i*k*j/n) of real samples.
std::vector<std::complex<double>> real_dft_coefficients(const std::vector<double>& v);

/// Signed frequency for bin k of an n-point DFT (k -> k-n above the Nyquist).
inline int signed_frequency(int k, int n) { return (2 * k <= n) ? k : k - n; }

} // namespace washboard::detail

#endif
