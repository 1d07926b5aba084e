#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pirsim/config.hpp"
#include "pirsim/mesh.hpp"
#include "pirsim/optics.hpp"
#include "pirsim/trajectory.hpp"

namespace pirsim::scene {

struct Actor {
    TriangleMesh mesh;
    Trajectory trajectory;
    double t_obj_k = 0.0;
};

struct EventMeta {
    std::string label = "clutter";
    double speed_mps = 0.0;
    double theta_rad = 0.0;
    double range_m = 0.0;
    uint64_t seed = 0;
    int scene_id = 0;
    std::vector<std::string> flags;
};

struct Event {
    std::array<std::vector<double>, 8> channels;  // order A,B,C,D,L1,L2,R1,R2
    EventMeta meta;

    int samples() const { return static_cast<int>(channels[0].size()); }
};

struct SceneSpec {
    std::vector<Actor> actors;  // at most one human/animal actor
    optics::SensorTowerConfig tower;
    SceneRadiometry radiometry;
    radiometry::SensorResponseParams response;
    double grid_resolution_per_m = 150.0;
    double agc_target_fraction = 0.7;
    double agc_max_gain = 5000.0;
    uint64_t seed = 0;
    EventMeta meta;  // label/speed/theta/range filled by the caller

    void validate() const;
};

struct ProjectedTri {
    Tri2 tri;             // pixel-plane coordinates relative to the lens mount
    double mean_range_m;  // mean pinhole->vertex distance
    double mean_depth_m;  // mean axial (y) distance past the pinhole
};

// Pinhole projection of a displaced mesh onto the lens pixel plane (the
// vertical plane through plane_origin). Triangles fully behind the pinhole
// are clipped out; a mesh straddling the lens plane is an error.
std::vector<ProjectedTri> project_mesh(const TriangleMesh& mesh, const Vec3& displacement,
                                       const Vec3& pinhole, const Vec2& plane_origin);

// Tiny-square occupancy count over one pixel rectangle: cells of source-plane
// side 1/grid_res (pixel-plane side shrunk by source_scale) whose center lies
// inside the union of the projected triangles. Returns m^2 at the source.
double rasterize_coverage(std::span<const Tri2> tris, const Rect2& rect,
                          double grid_res_per_m, double source_scale = 1.0);

Event simulate_event(const SceneSpec& spec);

struct DatasetRequest {
    int human = 0;
    int animal = 0;
    int clutter = 0;
    uint64_t seed = 0;
};

struct DatasetManifest {
    int format_version = 1;
    uint64_t seed = 0;
    std::string config_hash;
    std::string run_hash;
    std::array<int, 3> counts{};  // human, animal, clutter
    struct Item {
        int id;
        std::string label;
        std::string csv;
        std::string meta;
    };
    std::vector<Item> events;
};

// Builds the scene for one event id of a request; exposed so diagnostics can
// replay a single event deterministically.
SceneSpec build_event_scene(const DatasetRequest& req, const AppConfig& cfg, int event_id);

DatasetManifest generate_dataset(const DatasetRequest& req, const AppConfig& cfg,
                                 const std::filesystem::path& out_dir, int jobs = 1);

}  // namespace pirsim::scene
