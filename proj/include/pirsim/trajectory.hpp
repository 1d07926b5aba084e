#pragma once

#include <vector>

#include "pirsim/geometry.hpp"

namespace pirsim::scene {

struct Gust {
    double center_s = 0.0;
    double sigma_s = 1.0;
    double weight = 1.0;
};

// Rigid-body displacement of an actor over time. Lines model intruder walks
// (heading theta measured from a broadside, i.e. x-parallel, crossing);
// oscillations model wind-blown sway about a fixed anchor.
struct Trajectory {
    enum class Kind { line, oscillation };

    Kind kind = Kind::line;
    Vec3 start;                 // line: position at t=0; oscillation: anchor
    double speed_mps = 0.0;
    double theta_rad = 0.0;
    int direction = +1;         // +1 walks toward +x, -1 toward -x
    // Walking is clamped to [active_from_s, active_until_s]; outside the
    // actor holds the boundary position (parked outside the field of view).
    double active_from_s = -1e18;
    double active_until_s = 1e18;

    double sway_amplitude_m = 0.0;
    double sway_freq_hz = 0.0;
    double sway_phase_rad = 0.0;
    std::vector<Gust> gusts;    // empty: constant unit envelope

    bool range_override = false;  // skip the 1-3 m/s and 5-10 m checks

    Vec3 position(double t_s) const;
    void validate() const;
};

}  // namespace pirsim::scene
