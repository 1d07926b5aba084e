#include "pirsim/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "pirsim/util.hpp"

namespace pirsim::scene {

Vec3 Trajectory::position(double t_s) const {
    if (kind == Kind::line) {
        double t = std::clamp(t_s, active_from_s, active_until_s);
        Vec3 dir{direction * std::cos(theta_rad), std::sin(theta_rad), 0.0};
        return start + (speed_mps * t) * dir;
    }
    double env = 1.0;
    if (!gusts.empty()) {
        env = 0.0;
        for (const auto& g : gusts) {
            double z = (t_s - g.center_s) / g.sigma_s;
            env += g.weight * std::exp(-0.5 * z * z);
        }
        env = std::min(env, 1.0);
    }
    double sway = sway_amplitude_m * env *
                  std::sin(2.0 * M_PI * sway_freq_hz * t_s + sway_phase_rad);
    return start + Vec3{sway, 0.0, 0.0};
}

void Trajectory::validate() const {
    if (kind == Kind::line) {
        if (direction != 1 && direction != -1) throw ConfigError("trajectory: direction must be +-1");
        if (!range_override) {
            if (speed_mps < 1.0 || speed_mps > 3.0)
                throw ConfigError("trajectory: line speed must be in [1,3] m/s");
            double y0 = position(active_from_s).y;
            double y1 = position(active_until_s).y;
            if (std::min(y0, y1) < 5.0 - 1e-9 || std::max(y0, y1) > 10.0 + 1e-9)
                throw ConfigError("trajectory: walking path leaves the 5-10 m range band");
        }
    } else {
        if (sway_amplitude_m < 0.0 || sway_freq_hz < 0.0)
            throw ConfigError("trajectory: sway parameters must be >= 0");
        if (!range_override && (start.y < 5.0 || start.y > 10.0))
            throw ConfigError("trajectory: sway anchor outside the 5-10 m range band");
    }
}

}  // namespace pirsim::scene
