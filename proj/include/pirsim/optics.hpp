#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pirsim/geometry.hpp"

namespace pirsim::optics {

// World frame: x to the tower's right, y pointing away from the tower along
// the central optical axis, z up. Pixel planes are vertical x-z planes at
// y = 0 through each lens mount; lenslet pinholes sit at mount + f * axis.

struct PixelPair {
    // Element rectangles in focal-plane coordinates (meters), u horizontal,
    // w vertical, both measured from the lens optical axis. vertical_offset
    // is the pair-center displacement already baked into the rectangles.
    Rect2 positive_rect;
    Rect2 negative_rect;
    double vertical_offset_m = 0.0;
};

struct LensSystem {
    enum class Kind { spot, multi };

    std::string id;
    Kind kind = Kind::spot;
    std::vector<double> lenslet_azimuths_rad;  // one per lenslet
    double focal_length_m = 0.0;
    double aperture_area_m2 = 0.0;
    double transmission = 1.0;      // eta
    double filter_fraction = 1.0;   // F
    double mount_x_m = 0.0;
    double mount_height_m = 0.0;

    Vec3 mount() const { return {mount_x_m, 0.0, mount_height_m}; }
    Vec3 lenslet_axis(int k) const;
    Vec3 lenslet_center(int k) const;  // pinhole position
    void validate() const;
};

struct ChannelConfig {
    std::string name;      // A,B,C,D,L1,L2,R1,R2
    std::string lens_id;
    PixelPair pair;
};

struct SensorTowerConfig {
    int config_version = 0;
    double sample_rate_hz = 20.0;
    int samples_per_event = 1024;
    std::map<std::string, LensSystem> lenses;
    std::vector<ChannelConfig> channels;

    const LensSystem& lens_for(const ChannelConfig& ch) const;
    const ChannelConfig* find_channel(const std::string& name) const;
    // Structural checks on whatever channels are present.
    void validate() const;
    // Additionally requires the full 8-channel tower layout with shared lenses.
    void validate_full() const;
};

inline constexpr std::array<const char*, 8> kChannelOrder = {
    "A", "B", "C", "D", "L1", "L2", "R1", "R2"};

struct VirtualBeam {
    std::string channel;
    int lenslet_index = 0;
    int polarity = +1;
    Vec3 origin;                         // pinhole
    std::array<Vec3, 4> pixel_corners;   // world positions of the pixel rect corners
    std::array<Vec3, 4> corner_dirs;     // unit rays cast into the scene
};

std::vector<VirtualBeam> build_virtual_beams(const SensorTowerConfig& config);

struct VpaQuad {
    int beam_index = 0;
    bool parallel = false;               // beam could not be intersected with the plane
    std::array<Vec2, 4> corners{};       // (x, z) coordinates in the plane y = range
    double area() const;
    double min_z() const;
    double max_z() const;
};

// Intersects every beam frustum with the vertical plane y = range_m.
std::vector<VpaQuad> vpa_at_plane(const std::vector<VirtualBeam>& beams, double range_m);

struct RowSeparationReport {
    bool vacuous = false;      // config lacks a B or C row
    double min_gap_m = 0.0;    // signed; negative means rows overlap
    double at_range_m = 0.0;
};

RowSeparationReport check_row_separation(const SensorTowerConfig& config,
                                         double r_min_m = 5.0, double r_max_m = 10.0);

}  // namespace pirsim::optics
