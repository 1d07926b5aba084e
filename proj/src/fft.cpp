#include "pirsim/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace pirsim {

namespace {

using cd = std::complex<double>;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_pow2(std::vector<cd>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        cd wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                cd u = a[i + j];
                cd v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Bluestein: expresses a length-n DFT as a convolution, evaluated with a
// power-of-two FFT of size >= 2n-1.
void fft_bluestein(std::vector<cd>& a, bool inverse) {
    const size_t n = a.size();
    const double sign = inverse ? 1.0 : -1.0;
    size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    std::vector<cd> chirp(n);
    for (size_t k = 0; k < n; ++k) {
        // k^2/2 mod n kept in double; use modular index to avoid precision loss
        uint64_t k2 = (static_cast<uint64_t>(k) * k) % (2 * n);
        double ang = sign * M_PI * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = cd(std::cos(ang), std::sin(ang));
    }

    std::vector<cd> x(m, cd(0, 0)), y(m, cd(0, 0));
    for (size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
    for (size_t k = 0; k < n; ++k) {
        cd c = std::conj(chirp[k]);
        y[k] = c;
        if (k != 0) y[m - k] = c;
    }
    fft_pow2(x, false);
    fft_pow2(y, false);
    for (size_t k = 0; k < m; ++k) x[k] *= y[k];
    fft_pow2(x, true);
    for (size_t k = 0; k < m; ++k) x[k] /= static_cast<double>(m);
    for (size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
}

}  // namespace

void fft(std::vector<cd>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0) throw std::invalid_argument("fft: empty input");
    if (n == 1) return;
    if (is_pow2(n)) {
        fft_pow2(a, inverse);
    } else {
        fft_bluestein(a, inverse);
    }
    if (inverse) {
        for (auto& v : a) v /= static_cast<double>(n);
    }
}

std::vector<double> cross_correlation(const std::vector<double>& a,
                                      const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cross_correlation: length mismatch");
    const size_t n = a.size();
    size_t m = 1;
    while (m < 2 * n) m <<= 1;
    std::vector<cd> fa(m, cd(0, 0)), fb(m, cd(0, 0));
    for (size_t i = 0; i < n; ++i) fa[i] = cd(a[i], 0);
    for (size_t i = 0; i < n; ++i) fb[i] = cd(b[i], 0);
    fft(fa);
    fft(fb);
    for (size_t i = 0; i < m; ++i) fa[i] = std::conj(fa[i]) * fb[i];
    fft(fa, true);
    // c[j] = sum_n a(n) b(n+j) lives at index j (mod m); j in [-(n-1), n-1]
    std::vector<double> out(2 * n - 1);
    for (size_t j = 0; j < n; ++j) out[n - 1 + j] = fa[j].real();
    for (size_t j = 1; j < n; ++j) out[n - 1 - j] = fa[m - j].real();
    return out;
}

}  // namespace pirsim
