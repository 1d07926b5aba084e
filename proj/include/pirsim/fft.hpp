#pragma once

#include <complex>
#include <vector>

namespace pirsim {

// In-place DFT of arbitrary length: radix-2 when n is a power of two,
// Bluestein's chirp-z otherwise. inverse=true applies the 1/n factor.
void fft(std::vector<std::complex<double>>& a, bool inverse = false);

// Linear cross-correlation r(k) = sum_n a(n) * b(n+k) for k in
// [-(N-1), N-1], returned with index k + (N-1). Inputs must share length N.
std::vector<double> cross_correlation(const std::vector<double>& a,
                                      const std::vector<double>& b);

}  // namespace pirsim
