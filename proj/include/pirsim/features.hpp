#pragma once

#include <array>
#include <string>
#include <vector>

#include "pirsim/chirplet.hpp"
#include "pirsim/config.hpp"
#include "pirsim/scene.hpp"

namespace pirsim::features {

// Per-channel signal energy sum((v - mean)^2); the mean removal strips the
// level-shifter DC offset. Channel order A,B,C,D,L1,L2,R1,R2.
std::array<double, 8> energy_features(const scene::Event& ev);

struct RhoMax {
    double value = 0.0;
    int lag = 0;  // samples by which the R column lags the L column;
                  // positive for left-to-right motion
};

// Jointly normalized max cross-correlation between the (L1,R1) and (L2,R2)
// spot-lens pairs over every integer lag.
RhoMax rho_max(const scene::Event& ev);

// 60 chirplet parameters: channels A..D (major), 3 chirplets in greedy
// order, parameters (a, m, omega, c, d). A channel whose decomposition is
// empty (zero signal) yields a zero block and a c60_zero_<ch> flag.
std::array<double, 60> c60_features(const scene::Event& ev,
                                    const chirplet::DecomposeOptions& opts = {},
                                    std::vector<std::string>* flags = nullptr);

enum class Inference {
    short_animal_5m,
    animal_10m,
    tall_animal_5m,
    human_10m,
    short_human_5m,
    human_5m,
    clutter_unlikely,
};

const char* to_string(Inference inf);

// Bit pattern over thresholded A,B,C,D energies mapped to the indication
// table; unlisted patterns read as clutter/unlikely.
Inference truth_table_inference(const std::array<double, 4>& e_abcd,
                                const std::array<double, 4>& thresholds);

// Per-channel A..D thresholds: 5x the mean idle-noise energy measured from
// seeded actor-free simulations.
std::array<double, 4> calibrate_thresholds(const AppConfig& cfg, uint64_t seed, int runs = 100);

struct FeatureVector {
    std::array<double, 8> e8{};
    double rho_max = 0.0;
    int rho_lag = 0;
    std::array<double, 60> c60{};
    std::string label;
    std::vector<std::string> flags;
};

FeatureVector extract_features(const scene::Event& ev,
                               const chirplet::DecomposeOptions& opts = {});

}  // namespace pirsim::features
