#include "pirsim/radiometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pirsim/rng.hpp"
#include "pirsim/util.hpp"

namespace pirsim::radiometry {

void RadiometryParams::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!in_unit(tau) || !in_unit(eta) || !in_unit(filter_fraction))
        throw ConfigError("radiometry: tau, eta, filter_fraction must be in (0,1]");
    if (aperture_area_m2 <= 0.0) throw ConfigError("radiometry: aperture area must be > 0");
    if (t_obj_k <= 0.0 || t_background_k <= 0.0)
        throw ConfigError("radiometry: temperatures must be > 0 K");
}

double net_power(const RadiometryParams& p, double a_proj_m2, double range_m) {
    if (range_m <= 0.0) throw std::domain_error("net_power: range must be > 0");
    if (a_proj_m2 < 0.0) throw std::domain_error("net_power: projected area must be >= 0");
    double t4 = std::pow(p.t_obj_k, 4) - std::pow(p.t_background_k, 4);
    return p.tau * p.eta * p.filter_fraction * p.aperture_area_m2 * a_proj_m2 * p.sigma * t4 /
           (M_PI * range_m * range_m);
}

void SensorResponseParams::validate() const {
    if (k1 <= 0.0 || k2 <= 0.0 || k3 <= 0.0 || k4 <= 0.0)
        throw ConfigError("sensor_response: k1..k4 must be > 0");
    if (k2 == k4) throw ConfigError("sensor_response: k2 and k4 must differ");
    if (!(clip_low_v < dc_offset_v && dc_offset_v < clip_high_v))
        throw ConfigError("sensor_response: require clip_low < dc_offset < clip_high");
    if (noise_std_v < 0.0) throw ConfigError("sensor_response: noise_std must be >= 0");
}

double impulse_response(const SensorResponseParams& p, double t_s) {
    if (t_s < 0.0) throw std::domain_error("impulse_response: t must be >= 0");
    return p.k1 * std::exp(-p.k2 * t_s) - p.k3 * std::exp(-p.k4 * t_s);
}

std::vector<double> impulse_kernel(const SensorResponseParams& p, double dt_s) {
    if (dt_s <= 0.0) throw std::domain_error("impulse_kernel: dt must be > 0");
    // Peak magnitude: check t=0 plus the interior extremum of each term mix.
    double peak = std::abs(p.k1 - p.k3);
    double t_ext = std::log((p.k3 * p.k4) / (p.k1 * p.k2)) / (p.k4 - p.k2);
    if (t_ext > 0.0 && std::isfinite(t_ext))
        peak = std::max(peak, std::abs(impulse_response(p, t_ext)));
    const double cutoff = 1e-9 * peak;
    std::vector<double> h;
    // Envelope bound k1 e^{-k2 t} + k3 e^{-k4 t} decides truncation so a
    // zero crossing of h cannot end the kernel early.
    for (int n = 0;; ++n) {
        double t = n * dt_s;
        double envelope = p.k1 * std::exp(-p.k2 * t) + p.k3 * std::exp(-p.k4 * t);
        if (envelope < cutoff && n > 0) break;
        h.push_back(impulse_response(p, t));
        if (h.size() > 4'000'000) throw std::runtime_error("impulse_kernel: kernel too long");
    }
    return h;
}

std::vector<double> sense(std::span<const double> power_w, const SensorResponseParams& p,
                          double sample_rate_hz, uint64_t seed) {
    if (sample_rate_hz <= 0.0) throw std::domain_error("sense: sample rate must be > 0");
    p.validate();
    const std::vector<double> h = impulse_kernel(p, 1.0 / sample_rate_hz);
    const size_t n = power_w.size();
    std::vector<double> v(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double w = power_w[i];
        if (w == 0.0) continue;
        size_t kmax = std::min(h.size(), n - i);
        for (size_t k = 0; k < kmax; ++k) v[i + k] += w * h[k];
    }
    Rng rng(seed);
    for (size_t i = 0; i < n; ++i) {
        double x = v[i] * p.gain + p.dc_offset_v;
        if (p.noise_std_v > 0.0) x += rng.gauss() * p.noise_std_v;
        v[i] = std::clamp(x, p.clip_low_v, p.clip_high_v);
    }
    return v;
}

}  // namespace pirsim::radiometry
