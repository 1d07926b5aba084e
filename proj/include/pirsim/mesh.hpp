#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "pirsim/geometry.hpp"
#include "pirsim/rng.hpp"

namespace pirsim::scene {

enum class ActorClass { human, animal, clutter };

const char* to_string(ActorClass c);
ActorClass actor_class_from_string(const std::string& s);

struct Aabb {
    Vec3 lo, hi;
    double height() const { return hi.z - lo.z; }
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    ActorClass label_hint = ActorClass::clutter;

    Aabb bbox() const;
    void validate() const;
};

// Minimal OBJ subset: `v x y z` and `f i j k ...` lines (1-based indices,
// faces with more than three vertices are fan-triangulated).
TriangleMesh load_obj(std::istream& in, ActorClass label_hint);
TriangleMesh load_obj_file(const std::string& path, ActorClass label_hint);

// Procedural silhouettes. Meshes are authored feet-at-origin, facing +x,
// and spill nothing below z=0; callers place them in the world.
TriangleMesh make_human(double height_m, Rng& rng);
TriangleMesh make_animal(double shoulder_height_m, Rng& rng);
// Ellipsoid shrub. The center is the sway anchor; the mesh is centered there.
TriangleMesh make_shrub(double semi_x_m, double semi_y_m, double semi_z_m);

}  // namespace pirsim::scene
