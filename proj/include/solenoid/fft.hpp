#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace solenoid {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place iterative radix-2 FFT. Size must be a power of two.
/// Forward transform uses kernel exp(-i 2 pi jk / n); inverse divides by n.
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (!is_pow2(static_cast<int>(n)))
        throw std::invalid_argument("fft_pow2: size must be a power of two");
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        double inv = 1.0 / static_cast<double>(n);
        for (auto& z : a) z *= inv;
    }
}

/// Signed frequency for DFT bin k of size n: 0..n/2-1, then -n/2..-1.
inline int signed_freq(int k, int n) { return k < n / 2 ? k : k - n; }

}  // namespace solenoid
