#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "oracle_polygon.hpp"
#include "pirsim/event_io.hpp"
#include "pirsim/features.hpp"
#include "pirsim/rng.hpp"
#include "pirsim/scene.hpp"
#include "pirsim/util.hpp"
#include "test_util.hpp"

using namespace pirsim;
using namespace pirsim::scene;

namespace {

SceneSpec base_spec(const AppConfig& cfg, uint64_t seed) {
    SceneSpec spec;
    spec.tower = cfg.tower;
    spec.radiometry = cfg.radiometry;
    spec.response = cfg.response;
    spec.grid_resolution_per_m = cfg.gen.grid_resolution_per_m;
    spec.agc_target_fraction = cfg.gen.agc_target_fraction;
    spec.agc_max_gain = cfg.gen.agc_max_gain;
    spec.seed = seed;
    return spec;
}

Actor walking_actor(TriangleMesh mesh, double range, double speed, double theta, double t_mid,
                    double t_half, double t_obj = 305.0) {
    Actor a;
    a.mesh = std::move(mesh);
    a.trajectory.kind = Trajectory::Kind::line;
    a.trajectory.speed_mps = speed;
    a.trajectory.theta_rad = theta;
    a.trajectory.direction = +1;
    a.trajectory.start = {-speed * std::cos(theta) * t_mid, range - speed * std::sin(theta) * t_mid,
                          0.0};
    a.trajectory.active_from_s = t_mid - t_half;
    a.trajectory.active_until_s = t_mid + t_half;
    a.t_obj_k = t_obj;
    return a;
}

std::vector<double> mean_removed(const std::vector<double>& v) {
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] - mean;
    return out;
}

}  // namespace

TEST_CASE("obj loader handles the v/f subset with fan triangulation") {
    std::istringstream obj(
        "# shrub fixture\n"
        "v 0 0 0\nv 1 0 0\nv 1 0 1\nv 0 0 1\nv 0.5 1 0.5\n"
        "f 1 2 3 4\n"
        "f 1 2 5\n");
    TriangleMesh mesh = load_obj(obj, ActorClass::clutter);
    CHECK(mesh.vertices.size() == 5);
    CHECK(mesh.triangles.size() == 3);  // quad splits into two

    std::istringstream bad("v 0 0 0\nv 1 0 0\nf 1 2 9\n");
    CHECK_THROWS_AS(load_obj(bad, ActorClass::clutter), DataError);
}

TEST_CASE("procedural meshes satisfy their silhouette invariants") {
    Rng rng(1);
    TriangleMesh human = make_human(1.8, rng);
    human.validate();
    CHECK(human.bbox().height() == doctest::Approx(1.8).epsilon(1e-6));
    CHECK(human.bbox().lo.z == doctest::Approx(0.0).epsilon(1e-9));

    TriangleMesh dog = make_animal(0.7, rng);
    dog.validate();
    CHECK(dog.bbox().height() == doctest::Approx(0.7).epsilon(1e-6));

    TriangleMesh shrub = make_shrub(0.4, 0.3, 0.5);
    shrub.validate();
    CHECK(shrub.bbox().height() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("mesh validation rejects bad geometry and mislabeled sizes") {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    m.triangles = {{0, 1, 2}};  // collinear
    CHECK_THROWS_AS(m.validate(), DataError);

    Rng rng(2);
    TriangleMesh short_human = make_human(1.8, rng);
    short_human.label_hint = ActorClass::human;
    for (auto& v : short_human.vertices) v.z *= 0.6;  // 1.08 m "human"
    CHECK_THROWS_AS(short_human.validate(), DataError);
}

TEST_CASE("project_mesh follows the pinhole similar-triangles oracle") {
    // Oracle: a square of side s facing the sensor at axial distance D past
    // the pinhole images with side s * f / D on the pixel plane f behind.
    const double focal = 0.02, range = 6.0, side = 0.8;
    TriangleMesh sq;
    sq.vertices = {{-side / 2, range, 1.0 - side / 2},
                   {side / 2, range, 1.0 - side / 2},
                   {side / 2, range, 1.0 + side / 2},
                   {-side / 2, range, 1.0 + side / 2}};
    sq.triangles = {{0, 1, 2}, {0, 2, 3}};
    const Vec3 pinhole{0.0, focal, 1.0};
    auto proj = project_mesh(sq, {0, 0, 0}, pinhole, {0.0, 1.0});
    REQUIRE(proj.size() == 2);
    double want = side * focal / (range - focal);
    double u_lo = 1e9, u_hi = -1e9;
    for (const auto& pt : proj)
        for (const Vec2* v : {&pt.tri.a, &pt.tri.b, &pt.tri.c}) {
            u_lo = std::min(u_lo, v->u);
            u_hi = std::max(u_hi, v->u);
        }
    CHECK(u_hi - u_lo == doctest::Approx(want).epsilon(1e-9));
    CHECK(proj[0].mean_range_m == doctest::Approx(range - focal).epsilon(1e-3));
}

TEST_CASE("translating a mesh parallel to the pixel plane translates its projection") {
    Rng rng(3);
    TriangleMesh human = make_human(1.7, rng);
    const Vec3 pinhole{0.0, 0.02, 0.9};
    auto p0 = project_mesh(human, {0.3, 6.0, 0.0}, pinhole, {0.0, 0.9});
    auto p1 = project_mesh(human, {0.8, 6.0, 0.2}, pinhole, {0.0, 0.9});
    REQUIRE(p0.size() == p1.size());
    // constant offset between matched vertices, shape preserved
    double du = p1[0].tri.a.u - p0[0].tri.a.u;
    double dw = p1[0].tri.a.w - p0[0].tri.a.w;
    for (size_t i = 0; i < p0.size(); ++i) {
        CHECK(p1[i].tri.b.u - p0[i].tri.b.u == doctest::Approx(du).epsilon(1e-9));
        CHECK(p1[i].tri.c.w - p0[i].tri.c.w == doctest::Approx(dw).epsilon(1e-9));
    }
}

TEST_CASE("project_mesh clips behind the aperture and flags straddling actors") {
    TriangleMesh m;
    m.vertices = {{0, -1.0, 0}, {1, -1.0, 0}, {0, -1.0, 1}};
    m.triangles = {{0, 1, 2}};
    CHECK(project_mesh(m, {0, 0, 0}, {0, 0.02, 1}, {0, 1}).empty());

    TriangleMesh straddle;
    straddle.vertices = {{0, -1.0, 0}, {1, 5.0, 0}, {0, 5.0, 1}};
    straddle.triangles = {{0, 1, 2}};
    CHECK_THROWS_MSG(std::runtime_error, "intersects the lens plane",
                     project_mesh(straddle, {0, 0, 0}, {0, 0.02, 1}, {0, 1}));

    TriangleMesh empty;
    CHECK(project_mesh(empty, {0, 0, 0}, {0, 0.02, 1}, {0, 1}).empty());
}

TEST_CASE("rasterized coverage of a half-covering triangle") {
    Rect2 rect{0, 0, 1, 1};
    std::vector<Tri2> tri = {{{0, 0}, {1, 0}, {0, 1}}};
    const double res = 200.0;
    double area = rasterize_coverage(tri, rect, res);
    CHECK(std::abs(area - 0.5) / 0.5 <= 2.0 / res);
}

TEST_CASE("overlapping triangles count union area, not the sum") {
    Rng rng(11);
    Rect2 rect{0, 0, 1, 1};
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Tri2> tris;
        int n = 2 + trial % 3;
        for (int t = 0; t < n; ++t) {
            Tri2 tri{{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)},
                     {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)},
                     {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)}};
            if (std::abs(signed_area(tri)) < 0.02) {
                --t;
                continue;
            }
            tris.push_back(tri);
        }
        double oracle = pirsim_test::exact_union_area(tris);
        double sum = 0;
        for (const auto& t : tris) sum += std::abs(signed_area(t));
        double got = rasterize_coverage(tris, rect, 2000.0);
        CHECK(got == doctest::Approx(oracle).epsilon(0.01));
        if (oracle < 0.98 * sum)  // genuinely overlapping case
            CHECK(got < sum);
    }
}

TEST_CASE("triangle outside the rect covers nothing") {
    Rect2 rect{0, 0, 1, 1};
    std::vector<Tri2> tri = {{{2, 2}, {3, 2}, {2, 3}}};
    CHECK(rasterize_coverage(tri, rect, 100.0) == 0.0);
}

TEST_CASE("doubling grid resolution changes coverage by less than 1%") {
    Rng rng(4);
    TriangleMesh human = make_human(1.8, rng);
    const Vec3 pinhole{0.0, 0.02, 0.9};
    auto proj = project_mesh(human, {0.0, 6.0, 0.0}, pinhole, {0.0, 0.9});
    std::vector<Tri2> tris;
    for (const auto& p : proj) tris.push_back(p.tri);
    Rect2 rect{-0.004, -0.004, 0.004, 0.004};
    double scale = (6.0 - 0.02) / 0.02;
    double a1 = rasterize_coverage(tris, rect, 150.0, scale);
    double a2 = rasterize_coverage(tris, rect, 300.0, scale);
    REQUIRE(a1 > 0.0);
    CHECK(std::abs(a1 - a2) / a2 < 0.01);
}

TEST_CASE("spot channel sees one bipolar pulse, multi channel an oscillation") {
    AppConfig cfg = pirsim_test::default_config();
    SceneSpec spec = base_spec(cfg, 77);
    spec.response.noise_std_v = 0.0;
    Rng rng(5);
    spec.actors.push_back(
        walking_actor(make_human(1.8, rng), 6.0, 1.5, 0.0, 25.0, 24.0));
    spec.meta.label = "human";
    Event ev = simulate_event(spec);

    for (auto& ch : ev.channels) REQUIRE(ch.size() == 1024);
    auto l1 = mean_removed(ev.channels[4]);
    double pos = *std::max_element(l1.begin(), l1.end());
    double neg = *std::min_element(l1.begin(), l1.end());
    CHECK(pos > 0.1);
    CHECK(-neg > 0.1);
    // single bipolar pulse: big lobes are adjacent in time
    auto t_pos = std::max_element(l1.begin(), l1.end()) - l1.begin();
    auto t_neg = std::min_element(l1.begin(), l1.end()) - l1.begin();
    CHECK(std::abs(t_pos - t_neg) < 40);

    // multi-lens channel: an oscillatory train with several strong lobes
    auto b = mean_removed(ev.channels[1]);
    double bmax = 0;
    for (double x : b) bmax = std::max(bmax, std::abs(x));
    int crossings = 0;
    bool armed = false;
    int sign = 0;
    for (double x : b) {
        if (std::abs(x) > 0.35 * bmax) {
            int s = x > 0 ? 1 : -1;
            if (armed && s != sign) ++crossings;
            sign = s;
            armed = true;
        }
    }
    CHECK(crossings >= 5);
}

TEST_CASE("left-to-right motion delays the right column behind the left") {
    AppConfig cfg = pirsim_test::default_config();
    SceneSpec spec = base_spec(cfg, 78);
    Rng rng(6);
    spec.actors.push_back(walking_actor(make_human(1.8, rng), 6.5, 1.2, 0.1, 25.0, 24.0));
    spec.meta.label = "human";
    Event ev = simulate_event(spec);
    auto rho = features::rho_max(ev);
    CHECK(rho.value > 0.3);
    CHECK(rho.lag > 0);
}

TEST_CASE("straight-line crossing produces an up-chirp then down-chirp") {
    AppConfig cfg = pirsim_test::default_config();
    SceneSpec spec = base_spec(cfg, 79);
    spec.response.noise_std_v = 0.0;
    Rng rng(7);
    spec.actors.push_back(walking_actor(make_human(1.8, rng), 5.2, 1.0, 0.0, 25.0, 24.0));
    spec.meta.label = "human";
    Event ev = simulate_event(spec);
    auto b = mean_removed(ev.channels[1]);
    double bmax = 0;
    for (double x : b) bmax = std::max(bmax, std::abs(x));
    // zero crossings of the clean signal while it is active
    std::vector<double> t_cross;
    for (size_t i = 1; i < b.size(); ++i) {
        if (b[i - 1] == 0.0 || (b[i - 1] > 0) == (b[i] > 0)) continue;
        double frac = b[i - 1] / (b[i - 1] - b[i]);
        double t = static_cast<double>(i - 1) + frac;
        // only count crossings between significant lobes
        bool active = false;
        for (size_t j = i > 12 ? i - 12 : 0; j < std::min(b.size(), i + 12); ++j)
            if (std::abs(b[j]) > 0.15 * bmax) active = true;
        if (active) t_cross.push_back(t);
    }
    REQUIRE(t_cross.size() >= 8);
    std::vector<double> gaps;
    for (size_t i = 1; i < t_cross.size(); ++i) gaps.push_back(t_cross[i] - t_cross[i - 1]);
    auto min_it = std::min_element(gaps.begin(), gaps.end());
    size_t min_idx = static_cast<size_t>(min_it - gaps.begin());
    // interval sequence shrinks toward closest approach then grows
    CHECK(min_idx > 0);
    CHECK(min_idx < gaps.size() - 1);
    CHECK(gaps.front() > 1.2 * *min_it);
    CHECK(gaps.back() > 1.2 * *min_it);
}

TEST_CASE("row energies: human lights A-D, a dog only C,D") {
    AppConfig cfg = pirsim_test::default_config();

    SceneSpec idle = base_spec(cfg, 80);
    Event idle_ev = simulate_event(idle);
    auto floor_e = features::energy_features(idle_ev);

    SceneSpec human = base_spec(cfg, 81);
    Rng rng(8);
    human.actors.push_back(walking_actor(make_human(1.8, rng), 5.3, 1.5, 0.0, 25.0, 20.0));
    human.meta.label = "human";
    auto he = features::energy_features(simulate_event(human));
    for (int c = 0; c < 4; ++c)
        CHECK(he[static_cast<size_t>(c)] > 5.0 * floor_e[static_cast<size_t>(c)]);

    SceneSpec dog = base_spec(cfg, 82);
    dog.actors.push_back(walking_actor(make_animal(0.75, rng), 5.3, 1.5, 0.0, 25.0, 20.0));
    dog.meta.label = "animal";
    auto de = features::energy_features(simulate_event(dog));
    CHECK(de[2] > 5.0 * floor_e[2]);
    CHECK(de[3] > 5.0 * floor_e[3]);
    CHECK(de[0] < 5.0 * floor_e[0]);
    CHECK(de[1] < 5.0 * floor_e[1]);
}

TEST_CASE("oscillation trajectories have zero mean displacement, lines are monotone") {
    Trajectory sway;
    sway.kind = Trajectory::Kind::oscillation;
    sway.start = {1.0, 6.0, 0.8};
    sway.sway_amplitude_m = 0.3;
    sway.sway_freq_hz = 0.5;
    sway.sway_phase_rad = 0.4;
    double mean = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) mean += (sway.position(i * 0.05).x - 1.0) / n;
    CHECK(std::abs(mean) < 0.01);

    Trajectory line;
    line.kind = Trajectory::Kind::line;
    line.speed_mps = 2.0;
    line.direction = +1;
    line.start = {-5, 7, 0};
    line.active_from_s = 0.0;
    line.active_until_s = 5.0;
    double prev = line.position(0.0).x;
    for (double t = 0.25; t <= 5.0; t += 0.25) {
        CHECK(line.position(t).x > prev);
        prev = line.position(t).x;
    }
}

TEST_CASE("intruder that never enters a beam is flagged no_crossing") {
    AppConfig cfg = pirsim_test::default_config();
    SceneSpec spec = base_spec(cfg, 83);
    Rng rng(9);
    Actor a;
    a.mesh = make_human(1.8, rng);
    a.trajectory.kind = Trajectory::Kind::line;
    a.trajectory.speed_mps = 1.0;
    a.trajectory.direction = +1;
    a.trajectory.start = {-40.0, 7.0, 0.0};  // parked far outside the fan
    a.trajectory.active_from_s = 0.0;
    a.trajectory.active_until_s = 0.0;
    a.trajectory.range_override = true;
    a.t_obj_k = 305.0;
    spec.actors.push_back(a);
    spec.meta.label = "human";
    Event ev = simulate_event(spec);
    REQUIRE(ev.meta.flags.size() == 1);
    CHECK(ev.meta.flags[0] == "no_crossing");
    // still a complete event within the rails
    for (const auto& ch : ev.channels) {
        CHECK(ch.size() == 1024);
        for (double v : ch) {
            CHECK(v >= cfg.response.clip_low_v);
            CHECK(v <= cfg.response.clip_high_v);
        }
    }
}

TEST_CASE("scene validation enforces single intruder and grid floor") {
    AppConfig cfg = pirsim_test::default_config();
    SceneSpec spec = base_spec(cfg, 84);
    Rng rng(10);
    spec.actors.push_back(walking_actor(make_human(1.8, rng), 6, 1.5, 0, 25, 20));
    spec.actors.push_back(walking_actor(make_animal(0.8, rng), 7, 1.5, 0, 25, 20));
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    SceneSpec spec2 = base_spec(cfg, 85);
    spec2.grid_resolution_per_m = 50.0;
    CHECK_THROWS_AS(spec2.validate(), ConfigError);
}

TEST_CASE("dataset generation: exact counts, determinism, empty datasets") {
    AppConfig cfg = pirsim_test::default_config();
    DatasetRequest req{2, 1, 2, 1234};

    pirsim_test::TempDir d1("ds1"), d2("ds2");
    auto m1 = generate_dataset(req, cfg, d1.path, 2);
    auto m2 = generate_dataset(req, cfg, d2.path, 1);
    CHECK(m1.events.size() == 5);
    CHECK(m1.counts == std::array<int, 3>{2, 1, 2});
    CHECK(m1.run_hash == m2.run_hash);

    // byte-identical regardless of worker count
    for (const auto& e : m1.events) {
        for (const char* kind : {"csv", "meta"}) {
            auto name = std::string(kind) == "csv" ? e.csv : e.meta;
            std::ifstream f1(d1.path / name, std::ios::binary);
            std::ifstream f2(d2.path / name, std::ios::binary);
            std::stringstream s1, s2;
            s1 << f1.rdbuf();
            s2 << f2.rdbuf();
            CHECK(s1.str() == s2.str());
        }
    }
    std::ifstream f1(d1.path / "dataset.json", std::ios::binary), f2(d2.path / "dataset.json",
                                                                     std::ios::binary);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());

    pirsim_test::TempDir d3("ds3");
    auto m3 = generate_dataset({0, 0, 0, 7}, cfg, d3.path, 1);
    CHECK(m3.events.empty());
    auto back = io::read_manifest(d3.path / "dataset.json");
    CHECK(back.events.empty());
    CHECK(back.run_hash == m3.run_hash);
}

TEST_CASE("event CSV round trip and error diagnostics") {
    AppConfig cfg = pirsim_test::default_config();
    SceneSpec spec = base_spec(cfg, 86);
    Event ev = simulate_event(spec);
    ev.meta.label = "clutter";
    pirsim_test::TempDir dir("evio");
    auto path = dir.path / "event.csv";
    io::write_event_csv(path, ev);
    Event back = io::read_event_csv(path);
    CHECK(back.channels[3].size() == ev.channels[3].size());
    // 9 significant digits survive the round trip
    for (int c = 0; c < 8; ++c)
        for (size_t i = 0; i < 32; ++i)
            CHECK(back.channels[static_cast<size_t>(c)][i] ==
                  doctest::Approx(ev.channels[static_cast<size_t>(c)][i]).epsilon(1e-8));

    std::ofstream bad(dir.path / "bad.csv");
    bad << "A,B,C,D,L1,L2,R1,R2\n1,2,3\n";
    bad.close();
    CHECK_THROWS_MSG(DataError, "expected 8 columns", io::read_event_csv(dir.path / "bad.csv"));
}
