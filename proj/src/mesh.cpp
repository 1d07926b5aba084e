#include "pirsim/mesh.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pirsim/util.hpp"

namespace pirsim::scene {

const char* to_string(ActorClass c) {
    switch (c) {
        case ActorClass::human: return "human";
        case ActorClass::animal: return "animal";
        case ActorClass::clutter: return "clutter";
    }
    return "?";
}

ActorClass actor_class_from_string(const std::string& s) {
    if (s == "human") return ActorClass::human;
    if (s == "animal") return ActorClass::animal;
    if (s == "clutter") return ActorClass::clutter;
    throw DataError("unknown actor class: " + s);
}

Aabb TriangleMesh::bbox() const {
    if (vertices.empty()) return {{0, 0, 0}, {0, 0, 0}};
    Aabb box{vertices[0], vertices[0]};
    for (const auto& v : vertices) {
        box.lo.x = std::min(box.lo.x, v.x);
        box.lo.y = std::min(box.lo.y, v.y);
        box.lo.z = std::min(box.lo.z, v.z);
        box.hi.x = std::max(box.hi.x, v.x);
        box.hi.y = std::max(box.hi.y, v.y);
        box.hi.z = std::max(box.hi.z, v.z);
    }
    return box;
}

void TriangleMesh::validate() const {
    const int n = static_cast<int>(vertices.size());
    for (const auto& t : triangles) {
        for (int i : t)
            if (i < 0 || i >= n) throw DataError("mesh: triangle index out of range");
        Vec3 ab = vertices[static_cast<size_t>(t[1])] - vertices[static_cast<size_t>(t[0])];
        Vec3 ac = vertices[static_cast<size_t>(t[2])] - vertices[static_cast<size_t>(t[0])];
        if (norm(cross(ab, ac)) < 1e-14) throw DataError("mesh: degenerate triangle");
    }
    double h = bbox().height();
    if (label_hint == ActorClass::human && (h < 1.5 || h > 2.0))
        throw DataError("mesh: human silhouette height out of 1.5-2.0 m");
    if (label_hint == ActorClass::animal && (h < 0.5 || h > 1.2))
        throw DataError("mesh: animal silhouette height out of 0.5-1.2 m");
}

TriangleMesh load_obj(std::istream& in, ActorClass label_hint) {
    TriangleMesh mesh;
    mesh.label_hint = label_hint;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ss >> v.x >> v.y >> v.z))
                throw DataError("obj line " + std::to_string(lineno) + ": bad vertex");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ss >> tok) {
                // tolerate v/vt/vn syntax by reading up to the first slash
                idx.push_back(std::stoi(tok.substr(0, tok.find('/'))) - 1);
            }
            if (idx.size() < 3)
                throw DataError("obj line " + std::to_string(lineno) + ": face needs >= 3 vertices");
            for (size_t i = 1; i + 1 < idx.size(); ++i)
                mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
        }
        // other directives ignored
    }
    mesh.validate();
    return mesh;
}

TriangleMesh load_obj_file(const std::string& path, ActorClass label_hint) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open mesh file: " + path);
    return load_obj(in, label_hint);
}

namespace {

// Lat-long capsule around the segment p0->p1 (p0.z <= p1.z assumed for the
// vertical case; works for any axis).
void append_capsule(TriangleMesh& mesh, const Vec3& p0, const Vec3& p1, double radius,
                    int slices = 10, int rings = 4) {
    const int base = static_cast<int>(mesh.vertices.size());
    Vec3 axis = p1 - p0;
    double len = norm(axis);
    Vec3 w = len > 0 ? normalized(axis) : Vec3{0, 0, 1};
    Vec3 u = std::abs(w.z) < 0.9 ? normalized(cross(w, Vec3{0, 0, 1}))
                                 : normalized(cross(w, Vec3{1, 0, 0}));
    Vec3 v = cross(w, u);

    // Stack: bottom pole, bottom hemisphere rings (ending at the p0 equator),
    // top hemisphere rings (starting at the p1 equator), top pole.
    std::vector<std::vector<int>> ring_ids;
    mesh.vertices.push_back(p0 - radius * w);
    int bottom_pole = base;
    for (int half = 0; half < 2; ++half) {
        const Vec3& c = half == 0 ? p0 : p1;
        for (int r = 1; r <= rings; ++r) {
            double lat = half == 0 ? (static_cast<double>(r) / rings - 1.0) * M_PI / 2.0
                                   : (static_cast<double>(r - 1) / rings) * M_PI / 2.0;
            double cz = radius * std::sin(lat);
            double cr = radius * std::cos(lat);
            std::vector<int> ring;
            for (int s = 0; s < slices; ++s) {
                double a = 2.0 * M_PI * s / slices;
                Vec3 p = c + cz * w + cr * (std::cos(a) * u + std::sin(a) * v);
                ring.push_back(static_cast<int>(mesh.vertices.size()));
                mesh.vertices.push_back(p);
            }
            ring_ids.push_back(std::move(ring));
        }
    }
    mesh.vertices.push_back(p1 + radius * w);
    int top_pole = static_cast<int>(mesh.vertices.size()) - 1;

    for (int s = 0; s < slices; ++s) {
        int s1 = (s + 1) % slices;
        mesh.triangles.push_back({bottom_pole, ring_ids[0][s1], ring_ids[0][s]});
        mesh.triangles.push_back({top_pole, ring_ids.back()[s], ring_ids.back()[s1]});
    }
    for (size_t r = 0; r + 1 < ring_ids.size(); ++r) {
        for (int s = 0; s < slices; ++s) {
            int s1 = (s + 1) % slices;
            int a = ring_ids[r][s], b = ring_ids[r][s1];
            int c = ring_ids[r + 1][s], d = ring_ids[r + 1][s1];
            mesh.triangles.push_back({a, b, d});
            mesh.triangles.push_back({a, d, c});
        }
    }
}

void append_ellipsoid(TriangleMesh& mesh, const Vec3& center, double sx, double sy, double sz,
                      int slices = 10, int stacks = 8) {
    const int base = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(center + Vec3{0, 0, -sz});
    for (int r = 1; r < stacks; ++r) {
        double lat = -M_PI / 2.0 + M_PI * r / stacks;
        for (int s = 0; s < slices; ++s) {
            double a = 2.0 * M_PI * s / slices;
            mesh.vertices.push_back(center + Vec3{sx * std::cos(lat) * std::cos(a),
                                                  sy * std::cos(lat) * std::sin(a),
                                                  sz * std::sin(lat)});
        }
    }
    mesh.vertices.push_back(center + Vec3{0, 0, sz});
    int top = static_cast<int>(mesh.vertices.size()) - 1;
    auto rid = [&](int r, int s) { return base + 1 + (r - 1) * slices + (s % slices); };
    for (int s = 0; s < slices; ++s) {
        mesh.triangles.push_back({base, rid(1, s + 1), rid(1, s)});
        mesh.triangles.push_back({top, rid(stacks - 1, s), rid(stacks - 1, s + 1)});
    }
    for (int r = 1; r + 1 < stacks; ++r) {
        for (int s = 0; s < slices; ++s) {
            mesh.triangles.push_back({rid(r, s), rid(r, s + 1), rid(r + 1, s + 1)});
            mesh.triangles.push_back({rid(r, s), rid(r + 1, s + 1), rid(r + 1, s)});
        }
    }
}

}  // namespace

TriangleMesh make_human(double height_m, Rng& rng) {
    TriangleMesh mesh;
    mesh.label_hint = ActorClass::human;
    const double h = height_m;
    double jr = rng.uniform(0.9, 1.1);  // build variation
    double leg_r = 0.055 * h * jr;
    double torso_r = 0.105 * h * jr;
    double head_r = 0.062 * h;
    // Stacked capsules: legs, torso, head. Endpoints keep z within [0, h].
    append_capsule(mesh, {0, 0, leg_r}, {0, 0, 0.52 * h}, leg_r);
    append_capsule(mesh, {0, 0, 0.50 * h}, {0, 0, 0.86 * h - torso_r}, torso_r);
    append_ellipsoid(mesh, {0, 0, h - head_r}, head_r, head_r, head_r, 8, 6);
    mesh.validate();
    return mesh;
}

TriangleMesh make_animal(double shoulder_height_m, Rng& rng) {
    TriangleMesh mesh;
    mesh.label_hint = ActorClass::animal;
    const double h = shoulder_height_m;
    double body_len = h * rng.uniform(1.3, 1.7);
    double body_r = 0.26 * h;
    double leg_r = 0.07 * h;
    double body_z = h - body_r;
    // Horizontal body along +x with four legs and a head.
    append_capsule(mesh, {-body_len / 2 + body_r, 0, body_z}, {body_len / 2 - body_r, 0, body_z},
                   body_r);
    for (double sx : {-body_len / 2 + body_r, body_len / 2 - body_r})
        for (double sy : {-0.4 * body_r, 0.4 * body_r})
            append_capsule(mesh, {sx, sy, leg_r}, {sx, sy, body_z}, leg_r, 6, 2);
    double head_r = 0.20 * h;
    append_ellipsoid(mesh, {body_len / 2 + 0.4 * head_r, 0, h - head_r}, 1.4 * head_r, head_r,
                     head_r, 8, 6);
    mesh.validate();
    return mesh;
}

TriangleMesh make_shrub(double semi_x_m, double semi_y_m, double semi_z_m) {
    TriangleMesh mesh;
    mesh.label_hint = ActorClass::clutter;
    append_ellipsoid(mesh, {0, 0, 0}, semi_x_m, semi_y_m, semi_z_m);
    mesh.validate();
    return mesh;
}

}  // namespace pirsim::scene
