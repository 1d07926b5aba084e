#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "pirsim/fft.hpp"

using pirsim::cross_correlation;
using pirsim::fft;
using cd = std::complex<double>;

namespace {

// Direct O(n^2) DFT oracle.
std::vector<cd> naive_dft(const std::vector<cd>& a, bool inverse) {
    const size_t n = a.size();
    std::vector<cd> out(n, cd(0, 0));
    double sign = inverse ? 1.0 : -1.0;
    for (size_t k = 0; k < n; ++k) {
        for (size_t j = 0; j < n; ++j) {
            double ang = sign * 2.0 * M_PI * static_cast<double>(k * j % n) / static_cast<double>(n);
            out[k] += a[j] * cd(std::cos(ang), std::sin(ang));
        }
        if (inverse) out[k] /= static_cast<double>(n);
    }
    return out;
}

std::vector<cd> random_signal(size_t n, uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd;
    std::vector<cd> a(n);
    for (auto& v : a) v = cd(nd(g), nd(g));
    return a;
}

}  // namespace

TEST_CASE("fft matches the naive DFT for power-of-two and general sizes") {
    for (size_t n : {8u, 12u, 100u, 128u, 263u, 1000u}) {
        auto a = random_signal(n, 7 + n);
        auto want = naive_dft(a, false);
        auto got = a;
        fft(got);
        for (size_t k = 0; k < n; ++k)
            CHECK(std::abs(got[k] - want[k]) < 1e-8 * (1.0 + std::abs(want[k])));
    }
}

TEST_CASE("inverse fft round-trips") {
    for (size_t n : {16u, 60u, 1024u}) {
        auto a = random_signal(n, n);
        auto b = a;
        fft(b);
        fft(b, true);
        for (size_t k = 0; k < n; ++k) CHECK(std::abs(b[k] - a[k]) < 1e-10);
    }
}

TEST_CASE("fft preserves energy (Parseval)") {
    auto a = random_signal(512, 3);
    double e_time = 0;
    for (auto& v : a) e_time += std::norm(v);
    auto b = a;
    fft(b);
    double e_freq = 0;
    for (auto& v : b) e_freq += std::norm(v);
    CHECK(e_freq / 512.0 == doctest::Approx(e_time).epsilon(1e-12));
}

TEST_CASE("cross_correlation matches direct sums at every lag") {
    std::mt19937_64 g(5);
    std::normal_distribution<double> nd;
    const int n = 37;
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = nd(g);
    for (auto& v : b) v = nd(g);
    auto c = cross_correlation(a, b);
    REQUIRE(c.size() == 2 * n - 1);
    for (int k = -(n - 1); k <= n - 1; ++k) {
        double want = 0;
        for (int i = 0; i < n; ++i) {
            int j = i + k;
            if (j >= 0 && j < n) want += a[static_cast<size_t>(i)] * b[static_cast<size_t>(j)];
        }
        CHECK(c[static_cast<size_t>(k + n - 1)] == doctest::Approx(want).epsilon(1e-10));
    }
}
