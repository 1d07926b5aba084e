#pragma once

#include <string>

#include "pirsim/optics.hpp"
#include "pirsim/radiometry.hpp"

namespace pirsim {

// Scene-level radiometry (per-lens eta/F/A_e live on the lens; per-actor
// object temperatures come from the generator).
struct SceneRadiometry {
    double tau = 1.0;
    double sigma = 5.670374419e-8;
    double t_background_k = 295.0;
};

// Event-generator distributions, all configurable ([scene] section).
struct GeneratorParams {
    double grid_resolution_per_m = 150.0;
    double event_window_fraction = 0.6;
    double human_height_min_m = 1.55, human_height_max_m = 1.95;
    double animal_height_min_m = 0.55, animal_height_max_m = 1.05;
    double speed_min_mps = 1.0, speed_max_mps = 3.0;
    double theta_max_rad = 0.61;
    double range_min_m = 5.4, range_max_m = 8.6;
    double intruder_t_obj_min_k = 299.0, intruder_t_obj_max_k = 309.0;
    double clutter_dt_min_k = 1.5, clutter_dt_max_k = 6.0;
    int shrub_count_min = 1, shrub_count_max = 5;
    double sway_amplitude_min_m = 0.05, sway_amplitude_max_m = 0.4;
    double sway_freq_min_hz = 0.25, sway_freq_max_hz = 1.0;
    double shrub_semi_xy_min_m = 0.15, shrub_semi_xy_max_m = 0.9;
    double shrub_semi_z_min_m = 0.2, shrub_semi_z_max_m = 0.8;
    double shrub_center_z_min_m = 0.3, shrub_center_z_max_m = 1.4;
    double shrub_x_max_m = 2.2;
    int gust_count_min = 2, gust_count_max = 4;
    double gust_sigma_min_s = 2.0, gust_sigma_max_s = 6.0;
    double gust_weight_min = 0.3, gust_weight_max = 1.0;
    double agc_target_fraction = 0.7;
    double agc_max_gain = 5000.0;
};

struct AppConfig {
    optics::SensorTowerConfig tower;
    SceneRadiometry radiometry;
    radiometry::SensorResponseParams response;
    GeneratorParams gen;
    std::string raw_text;
    std::string config_hash;  // fnv1a64 of the config file bytes, hex

    static AppConfig load(const std::string& path);
    static AppConfig parse(const std::string& text, const std::string& origin = "<string>");
};

}  // namespace pirsim
