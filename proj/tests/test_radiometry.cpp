#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "pirsim/radiometry.hpp"
#include "pirsim/util.hpp"
#include "test_util.hpp"

using namespace pirsim;
using namespace pirsim::radiometry;

namespace {

RadiometryParams unit_params() {
    RadiometryParams p;
    p.tau = p.eta = p.filter_fraction = 1.0;
    p.aperture_area_m2 = 1e-4;
    p.t_obj_k = 305.0;
    p.t_background_k = 295.0;
    return p;
}

SensorResponseParams test_response() {
    SensorResponseParams p;
    p.k1 = 1570.796327;
    p.k2 = 0.6283185307;
    p.k3 = 78539.81634;
    p.k4 = 31.41592654;
    p.gain = 1.0;
    p.clip_low_v = -1e9;
    p.clip_high_v = 1e9;
    p.dc_offset_v = 0.0;
    p.noise_std_v = 0.0;
    return p;
}

}  // namespace

TEST_CASE("net_power matches the direct formula evaluation") {
    // Frozen from an independent high-precision evaluation of
    // tau*eta*F*A_e*A_proj*sigma*(T_obj^4-T_b^4)/(pi R^2) at these inputs.
    RadiometryParams p = unit_params();
    double got = net_power(p, 0.5, 5.0);
    CHECK(got == doctest::Approx(3.899745231353314e-5).epsilon(1e-12));

    // independent re-derivation, factored differently
    double t4 = (305.0 * 305.0) * (305.0 * 305.0) - (295.0 * 295.0) * (295.0 * 295.0);
    double oracle = (1e-4 / M_PI) * (0.5 / 25.0) * 5.670374419e-8 * t4;
    CHECK(got == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("net_power is zero without temperature contrast and odd under swap") {
    RadiometryParams p = unit_params();
    p.t_obj_k = p.t_background_k = 300.0;
    CHECK(net_power(p, 2.0, 7.0) == 0.0);

    RadiometryParams a = unit_params(), b = unit_params();
    std::swap(b.t_obj_k, b.t_background_k);
    CHECK(net_power(a, 1.0, 6.0) == doctest::Approx(-net_power(b, 1.0, 6.0)).epsilon(1e-15));
}

TEST_CASE("net_power follows inverse-square distance") {
    RadiometryParams p = unit_params();
    CHECK(net_power(p, 1.0, 10.0) == doctest::Approx(net_power(p, 1.0, 5.0) / 4.0).epsilon(1e-14));
    CHECK_THROWS_AS(net_power(p, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(net_power(p, -1.0, 5.0), std::domain_error);
}

TEST_CASE("impulse response evaluates h(t) = k1 e^-k2t - k3 e^-k4t") {
    SensorResponseParams p = test_response();
    CHECK(impulse_response(p, 0.0) == doctest::Approx(p.k1 - p.k3).epsilon(1e-15));
    // decays monotonically to zero past the late extremum
    double t_ext = std::log((p.k3 * p.k4) / (p.k1 * p.k2)) / (p.k4 - p.k2);
    double prev = std::abs(impulse_response(p, t_ext + 0.3));
    for (double t = t_ext + 0.6; t < 30.0; t += 0.3) {
        double cur = std::abs(impulse_response(p, t));
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
    CHECK(std::abs(impulse_response(p, 60.0)) < 1e-12 * std::abs(p.k1 - p.k3));
}

TEST_CASE("step response saturates at the closed-form integral of h") {
    // oracle: integral_0^inf h dt = k1/k2 - k3/k4 = 3.51 for these constants
    SensorResponseParams p = test_response();
    p.k1 = 3.0;
    p.k2 = 0.8;
    p.k3 = 1.2;
    p.k4 = 5.0;
    const double oracle = 3.51;
    double dt = 1e-5, integral = 0.0;
    for (double t = 0.0; t < 40.0; t += dt)
        integral += 0.5 * (impulse_response(p, t) + impulse_response(p, t + dt)) * dt;
    CHECK(integral == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(integral == doctest::Approx(p.k1 / p.k2 - p.k3 / p.k4).epsilon(1e-6));
}

TEST_CASE("sense with zero power gives exactly the dc offset when noiseless") {
    SensorResponseParams p = test_response();
    p.dc_offset_v = 1.65;
    p.clip_low_v = 0.0;
    p.clip_high_v = 3.3;
    std::vector<double> w(256, 0.0);
    auto v = sense(w, p, 20.0, 99);
    for (double x : v) CHECK(x == 1.65);
}

TEST_CASE("sense of a power impulse reproduces the sampled kernel") {
    SensorResponseParams p = test_response();
    std::vector<double> w(400, 0.0);
    w[0] = 1.0;
    auto v = sense(w, p, 20.0, 0);
    for (size_t n = 0; n < v.size(); ++n)
        CHECK(v[n] == doctest::Approx(impulse_response(p, static_cast<double>(n) / 20.0))
                          .epsilon(1e-12));
}

TEST_CASE("sine response amplitudes match the analytic transfer function within 2%") {
    // The sensor model is the discrete convolution with the sampled kernel,
    // so its exact transfer function is the geometric-series DTFT
    //   H(theta) = k1/(1 - e^-k2 dt e^-j theta) - k3/(1 - e^-k4 dt e^-j theta),
    // evaluated independently of the convolution code.
    SensorResponseParams p = test_response();
    const double fs = 20.0, dt = 1.0 / fs;
    const int n = 4096, settle = 1500;
    for (int probe = 1; probe <= 20; ++probe) {
        double f_hz = 0.15 + (9.3 - 0.15) * (probe - 1) / 19.0;
        double theta = 2.0 * M_PI * f_hz / fs;
        std::vector<double> w(n);
        for (int i = 0; i < n; ++i) w[static_cast<size_t>(i)] = std::sin(theta * i);
        auto v = sense(w, p, fs, 0);
        // quadrature projection over the settled tail
        double a = 0, b = 0;
        int count = 0;
        for (int i = settle; i < n - 100; ++i, ++count) {
            a += v[static_cast<size_t>(i)] * std::sin(theta * i);
            b += v[static_cast<size_t>(i)] * std::cos(theta * i);
        }
        double amp = 2.0 * std::sqrt(a * a + b * b) / count;

        std::complex<double> z = std::exp(std::complex<double>(0.0, -theta));
        std::complex<double> h_oracle =
            p.k1 / (1.0 - std::exp(-p.k2 * dt) * z) - p.k3 / (1.0 - std::exp(-p.k4 * dt) * z);
        CHECK(amp == doctest::Approx(std::abs(h_oracle)).epsilon(0.02));
    }
}

TEST_CASE("sense is linear before clipping") {
    SensorResponseParams p = test_response();
    p.dc_offset_v = 0.5;
    p.clip_low_v = -1e9;
    p.clip_high_v = 1e9;
    std::vector<double> w1(128), w2(128);
    for (int i = 0; i < 128; ++i) {
        w1[static_cast<size_t>(i)] = std::sin(0.3 * i) * 1e-6;
        w2[static_cast<size_t>(i)] = std::cos(0.11 * i) * 2e-6;
    }
    const double a = 2.0, b = -3.0;
    std::vector<double> mix(128);
    for (int i = 0; i < 128; ++i)
        mix[static_cast<size_t>(i)] = a * w1[static_cast<size_t>(i)] + b * w2[static_cast<size_t>(i)];
    auto va = sense(w1, p, 20.0, 0), vb = sense(w2, p, 20.0, 0), vm = sense(mix, p, 20.0, 0);
    for (int i = 0; i < 128; ++i) {
        double want = a * va[static_cast<size_t>(i)] + b * vb[static_cast<size_t>(i)] -
                      (a + b - 1.0) * p.dc_offset_v;
        CHECK(vm[static_cast<size_t>(i)] == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("sense is clipped to the rails and deterministic per seed") {
    SensorResponseParams p = test_response();
    p.dc_offset_v = 1.65;
    p.clip_low_v = 0.0;
    p.clip_high_v = 3.3;
    p.noise_std_v = 0.5;
    std::vector<double> w(512, 0.0);
    w[10] = 1e-3;
    auto v1 = sense(w, p, 20.0, 1234);
    auto v2 = sense(w, p, 20.0, 1234);
    auto v3 = sense(w, p, 20.0, 1235);
    CHECK(v1 == v2);
    CHECK(v1 != v3);
    for (double x : v1) {
        CHECK(x >= 0.0);
        CHECK(x <= 3.3);
    }
}

TEST_CASE("parameter validation") {
    SensorResponseParams p = test_response();
    p.k4 = p.k2;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = test_response();
    p.clip_low_v = 2.0;
    p.clip_high_v = 1.0;
    p.dc_offset_v = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    RadiometryParams r;
    r.tau = 1.5;
    CHECK_THROWS_AS(r.validate(), ConfigError);
}
