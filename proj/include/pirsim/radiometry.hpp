#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pirsim::radiometry {

struct RadiometryParams {
    double tau = 1.0;                  // atmospheric attenuation
    double eta = 1.0;                  // lens transmission
    double filter_fraction = 1.0;      // in-band fraction F
    double aperture_area_m2 = 0.0;     // A_e
    double sigma = 5.670374419e-8;     // Stefan-Boltzmann, W m^-2 K^-4
    double t_obj_k = 0.0;
    double t_background_k = 0.0;

    void validate() const;
};

// Net power received from a Lambertian source of projected area a_proj_m2
// at distance range_m: tau*eta*F*A_e*A_proj*sigma*(T_obj^4 - T_b^4)/(pi R^2).
double net_power(const RadiometryParams& p, double a_proj_m2, double range_m);

struct SensorResponseParams {
    // h(t) = k1 exp(-k2 t) - k3 exp(-k4 t); k1,k3 in V s^-1 W^-1, k2,k4 in s^-1.
    double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0;
    double gain = 1.0;
    double clip_low_v = 0.0;
    double clip_high_v = 0.0;
    double dc_offset_v = 0.0;
    double noise_std_v = 0.0;

    void validate() const;
};

double impulse_response(const SensorResponseParams& p, double t_s);

// h sampled at dt until |h| falls below 1e-9 of its peak magnitude.
std::vector<double> impulse_kernel(const SensorResponseParams& p, double dt_s);

// power (W, sampled) -> voltage: convolve with h, apply gain, add dc offset
// and seeded Gaussian noise, clip to the rails. Deterministic given seed.
std::vector<double> sense(std::span<const double> power_w, const SensorResponseParams& p,
                          double sample_rate_hz, uint64_t seed);

}  // namespace pirsim::radiometry
