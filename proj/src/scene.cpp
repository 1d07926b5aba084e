#include "pirsim/scene.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "pirsim/event_io.hpp"
#include "pirsim/radiometry.hpp"
#include "pirsim/rng.hpp"
#include "pirsim/util.hpp"

namespace pirsim::scene {

void SceneSpec::validate() const {
    tower.validate_full();
    response.validate();
    if (grid_resolution_per_m < 100.0)
        throw ConfigError("scene: grid_resolution must be >= 100 squares/m");
    int intruders = 0;
    for (const auto& a : actors) {
        a.mesh.validate();
        a.trajectory.validate();
        if (a.t_obj_k <= 0.0) throw ConfigError("scene: actor temperature must be > 0 K");
        if (a.mesh.label_hint != ActorClass::clutter) ++intruders;
    }
    if (intruders > 1) throw ConfigError("scene: at most one intruder actor");
}

std::vector<ProjectedTri> project_mesh(const TriangleMesh& mesh, const Vec3& displacement,
                                       const Vec3& pinhole, const Vec2& plane_origin) {
    std::vector<ProjectedTri> out;
    if (mesh.vertices.empty()) return out;
    const double lens_plane_y = pinhole.y;

    std::vector<Vec2> proj(mesh.vertices.size());
    std::vector<double> depth(mesh.vertices.size());
    std::vector<double> range(mesh.vertices.size());
    std::vector<char> in_front(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
        Vec3 v = mesh.vertices[i] + displacement;
        depth[i] = v.y - lens_plane_y;
        in_front[i] = depth[i] > 1e-9;
        if (!in_front[i]) continue;
        range[i] = norm(v - pinhole);
        // line through v and the pinhole, evaluated on the plane y = 0
        double s = -pinhole.y / (v.y - pinhole.y);
        Vec3 p = pinhole + s * (v - pinhole);
        proj[i] = {p.x - plane_origin.u, p.z - plane_origin.w};
    }

    out.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        int front = in_front[static_cast<size_t>(t[0])] + in_front[static_cast<size_t>(t[1])] +
                    in_front[static_cast<size_t>(t[2])];
        if (front == 0) continue;  // behind the aperture, clipped out
        if (front != 3)
            throw std::runtime_error("project_mesh: actor intersects the lens plane");
        ProjectedTri pt;
        pt.tri = {proj[static_cast<size_t>(t[0])], proj[static_cast<size_t>(t[1])],
                  proj[static_cast<size_t>(t[2])]};
        pt.mean_range_m = (range[static_cast<size_t>(t[0])] + range[static_cast<size_t>(t[1])] +
                           range[static_cast<size_t>(t[2])]) / 3.0;
        pt.mean_depth_m = (depth[static_cast<size_t>(t[0])] + depth[static_cast<size_t>(t[1])] +
                           depth[static_cast<size_t>(t[2])]) / 3.0;
        out.push_back(pt);
    }
    return out;
}

namespace {

struct Interval {
    int lo, hi;  // inclusive column range
};

}  // namespace

double rasterize_coverage(std::span<const Tri2> tris, const Rect2& rect,
                          double grid_res_per_m, double source_scale) {
    if (grid_res_per_m < 1.0) throw std::domain_error("rasterize_coverage: resolution must be >= 1");
    if (source_scale <= 0.0) throw std::domain_error("rasterize_coverage: bad source scale");
    const double cell_src = 1.0 / grid_res_per_m;
    const double cell = cell_src / source_scale;  // cell side in pixel-plane units
    const int cols = static_cast<int>(std::floor(rect.width() / cell + 0.5));
    const int rows = static_cast<int>(std::floor(rect.height() / cell + 0.5));
    if (cols <= 0 || rows <= 0 || tris.empty()) return 0.0;

    long covered = 0;
    std::vector<Interval> spans;
    for (int j = 0; j < rows; ++j) {
        const double wc = rect.w0 + (j + 0.5) * cell;
        if (wc >= rect.w1) break;
        spans.clear();
        for (const Tri2& t : tris) {
            const Vec2* v = &t.a;
            double lo = 1e300, hi = -1e300;
            int hits = 0;
            for (int e = 0; e < 3; ++e) {
                const Vec2& p = v[e];
                const Vec2& q = v[(e + 1) % 3];
                if ((p.w - wc) * (q.w - wc) > 0.0) continue;
                if (p.w == q.w) {
                    if (p.w == wc) {
                        lo = std::min({lo, p.u, q.u});
                        hi = std::max({hi, p.u, q.u});
                        hits += 2;
                    }
                    continue;
                }
                double u = p.u + (wc - p.w) * (q.u - p.u) / (q.w - p.w);
                lo = std::min(lo, u);
                hi = std::max(hi, u);
                ++hits;
            }
            if (hits < 2 || lo > hi) continue;
            int c0 = static_cast<int>(std::ceil((lo - rect.u0) / cell - 0.5));
            int c1 = static_cast<int>(std::floor((hi - rect.u0) / cell - 0.5));
            c0 = std::max(c0, 0);
            c1 = std::min(c1, cols - 1);
            if (c0 <= c1) spans.push_back({c0, c1});
        }
        if (spans.empty()) continue;
        std::sort(spans.begin(), spans.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        int cur_lo = spans[0].lo, cur_hi = spans[0].hi;
        for (size_t s = 1; s < spans.size(); ++s) {
            if (spans[s].lo > cur_hi + 1) {
                covered += cur_hi - cur_lo + 1;
                cur_lo = spans[s].lo;
                cur_hi = spans[s].hi;
            } else {
                cur_hi = std::max(cur_hi, spans[s].hi);
            }
        }
        covered += cur_hi - cur_lo + 1;
    }
    return static_cast<double>(covered) * cell_src * cell_src;
}

namespace {

// Pixel-plane bounding box of the displaced mesh bbox seen through a pinhole;
// nullopt when any corner is behind the lens plane (caller projects fully and
// lets project_mesh raise the diagnostic).
std::optional<Rect2> projected_bbox(const Aabb& box, const Vec3& displacement,
                                    const Vec3& pinhole, const Vec2& plane_origin) {
    Rect2 r{1e300, 1e300, -1e300, -1e300};
    for (int corner = 0; corner < 8; ++corner) {
        Vec3 v{corner & 1 ? box.hi.x : box.lo.x, corner & 2 ? box.hi.y : box.lo.y,
               corner & 4 ? box.hi.z : box.lo.z};
        v += displacement;
        if (v.y - pinhole.y <= 1e-9) return std::nullopt;
        double s = -pinhole.y / (v.y - pinhole.y);
        Vec3 p = pinhole + s * (v - pinhole);
        r.u0 = std::min(r.u0, p.x - plane_origin.u);
        r.u1 = std::max(r.u1, p.x - plane_origin.u);
        r.w0 = std::min(r.w0, p.z - plane_origin.w);
        r.w1 = std::max(r.w1, p.z - plane_origin.w);
    }
    return r;
}

bool rects_overlap(const Rect2& a, const Rect2& b) {
    return a.u0 < b.u1 && b.u0 < a.u1 && a.w0 < b.w1 && b.w0 < a.w1;
}

}  // namespace

Event simulate_event(const SceneSpec& spec) {
    spec.validate();
    const auto& tower = spec.tower;
    const int n = tower.samples_per_event;
    const double dt = 1.0 / tower.sample_rate_hz;

    std::array<std::vector<double>, 8> power;
    for (auto& p : power) p.assign(static_cast<size_t>(n), 0.0);

    bool intruder_seen = false;
    bool any_seen = false;

    // Group channels by lens so one projection serves both pixel pairs.
    for (const auto& [lens_id, lens] : tower.lenses) {
        std::vector<std::pair<int, const optics::ChannelConfig*>> users;
        for (size_t ci = 0; ci < tower.channels.size(); ++ci)
            if (tower.channels[ci].lens_id == lens_id)
                users.emplace_back(static_cast<int>(ci), &tower.channels[ci]);
        if (users.empty()) continue;

        Rect2 pair_bbox{1e300, 1e300, -1e300, -1e300};
        for (auto& [ci, ch] : users) {
            for (const Rect2* r : {&ch->pair.positive_rect, &ch->pair.negative_rect}) {
                pair_bbox.u0 = std::min(pair_bbox.u0, r->u0);
                pair_bbox.w0 = std::min(pair_bbox.w0, r->w0);
                pair_bbox.u1 = std::max(pair_bbox.u1, r->u1);
                pair_bbox.w1 = std::max(pair_bbox.w1, r->w1);
            }
        }
        const Vec2 plane_origin{lens.mount_x_m, lens.mount_height_m};

        for (size_t k = 0; k < lens.lenslet_azimuths_rad.size(); ++k) {
            const Vec3 pinhole = lens.lenslet_center(static_cast<int>(k));
            for (const auto& actor : spec.actors) {
                const Aabb box = actor.mesh.bbox();
                radiometry::RadiometryParams rp;
                rp.tau = spec.radiometry.tau;
                rp.sigma = spec.radiometry.sigma;
                rp.t_background_k = spec.radiometry.t_background_k;
                rp.t_obj_k = actor.t_obj_k;
                rp.eta = lens.transmission;
                rp.filter_fraction = lens.filter_fraction;
                rp.aperture_area_m2 = lens.aperture_area_m2;

                for (int t = 0; t < n; ++t) {
                    const Vec3 disp = actor.trajectory.position(t * dt);
                    auto bb = projected_bbox(box, disp, pinhole, plane_origin);
                    if (bb && !rects_overlap(*bb, pair_bbox)) continue;
                    auto proj = project_mesh(actor.mesh, disp, pinhole, plane_origin);
                    if (proj.empty()) continue;

                    double wsum = 0.0, rsum = 0.0, dsum = 0.0;
                    std::vector<Tri2> tris;
                    tris.reserve(proj.size());
                    for (const auto& pt : proj) {
                        tris.push_back(pt.tri);
                        double w = std::abs(signed_area(pt.tri));
                        wsum += w;
                        rsum += w * pt.mean_range_m;
                        dsum += w * pt.mean_depth_m;
                    }
                    if (wsum <= 0.0) continue;
                    const double mean_range = rsum / wsum;
                    const double mean_depth = dsum / wsum;
                    const double source_scale = mean_depth / pinhole.y;

                    for (auto& [ci, ch] : users) {
                        for (int pol : {+1, -1}) {
                            const Rect2& rect =
                                pol > 0 ? ch->pair.positive_rect : ch->pair.negative_rect;
                            double a = rasterize_coverage(tris, rect, spec.grid_resolution_per_m,
                                                          source_scale);
                            if (a <= 0.0) continue;
                            double p = radiometry::net_power(rp, a, mean_range);
                            power[static_cast<size_t>(ci)][static_cast<size_t>(t)] += pol * p;
                            any_seen = true;
                            if (actor.mesh.label_hint != ActorClass::clutter) intruder_seen = true;
                        }
                    }
                }
            }
        }
    }

    // AGC: one per-event gain, common to all channels, scaling the clean
    // (noise-free) peak to the target fraction of the clip headroom.
    radiometry::SensorResponseParams probe = spec.response;
    probe.gain = 1.0;
    probe.noise_std_v = 0.0;
    probe.dc_offset_v = 0.0;
    probe.clip_low_v = -1e30;
    probe.clip_high_v = 1e30;
    double peak = 0.0;
    for (const auto& p : power) {
        auto clean = radiometry::sense(p, probe, tower.sample_rate_hz, 0);
        for (double v : clean) peak = std::max(peak, std::abs(v));
    }
    const double headroom = std::min(spec.response.dc_offset_v - spec.response.clip_low_v,
                                     spec.response.clip_high_v - spec.response.dc_offset_v);
    double gain = 1.0;
    if (peak > 1e-30) gain = std::min(spec.agc_target_fraction * headroom / peak, spec.agc_max_gain);

    Event ev;
    ev.meta = spec.meta;
    ev.meta.seed = spec.seed;
    radiometry::SensorResponseParams rp = spec.response;
    rp.gain = spec.response.gain * gain;
    for (int ci = 0; ci < 8; ++ci)
        ev.channels[static_cast<size_t>(ci)] = radiometry::sense(
            power[static_cast<size_t>(ci)], rp, tower.sample_rate_hz,
            derive_seed(spec.seed, 1000 + static_cast<uint64_t>(ci)));

    bool has_intruder = std::any_of(spec.actors.begin(), spec.actors.end(), [](const Actor& a) {
        return a.mesh.label_hint != ActorClass::clutter;
    });
    if ((has_intruder && !intruder_seen) || (!has_intruder && !any_seen))
        ev.meta.flags.push_back("no_crossing");
    return ev;
}

namespace {

ActorClass class_of_event(const DatasetRequest& req, int event_id) {
    if (event_id < req.human) return ActorClass::human;
    if (event_id < req.human + req.animal) return ActorClass::animal;
    return ActorClass::clutter;
}

// Fan half-angle past which an intruder is parked: the widest lenslet
// azimuth plus the pixel half-fan plus a margin.
double fan_limit_rad(const optics::SensorTowerConfig& tower) {
    double amax = 0.0, whalf = 0.1;
    for (const auto& [id, lens] : tower.lenses) {
        for (double a : lens.lenslet_azimuths_rad) amax = std::max(amax, std::abs(a));
        for (const auto& ch : tower.channels) {
            if (ch.lens_id != id) continue;
            double umax = std::max(std::abs(ch.pair.positive_rect.u0),
                                   std::abs(ch.pair.negative_rect.u1));
            whalf = std::max(whalf, std::atan(umax / lens.focal_length_m));
        }
    }
    return amax + whalf + 0.05;
}

}  // namespace

SceneSpec build_event_scene(const DatasetRequest& req, const AppConfig& cfg, int event_id) {
    const GeneratorParams& g = cfg.gen;
    SceneSpec spec;
    spec.tower = cfg.tower;
    spec.radiometry = cfg.radiometry;
    spec.response = cfg.response;
    spec.grid_resolution_per_m = g.grid_resolution_per_m;
    spec.agc_target_fraction = g.agc_target_fraction;
    spec.agc_max_gain = g.agc_max_gain;
    spec.seed = derive_seed(req.seed, static_cast<uint64_t>(event_id));
    spec.meta.scene_id = event_id;

    Rng rng(spec.seed);
    const double duration = cfg.tower.samples_per_event / cfg.tower.sample_rate_hz;
    const ActorClass cls = class_of_event(req, event_id);
    spec.meta.label = to_string(cls);

    if (cls == ActorClass::clutter) {
        int n_shrubs = static_cast<int>(rng.uniform_int(g.shrub_count_min, g.shrub_count_max));
        double range_sum = 0.0;
        for (int s = 0; s < n_shrubs; ++s) {
            double sx = rng.uniform(g.shrub_semi_xy_min_m, g.shrub_semi_xy_max_m);
            double sy = rng.uniform(g.shrub_semi_xy_min_m, g.shrub_semi_xy_max_m);
            double sz = rng.uniform(g.shrub_semi_z_min_m, g.shrub_semi_z_max_m);
            double cz = std::max(rng.uniform(g.shrub_center_z_min_m, g.shrub_center_z_max_m),
                                 sz + 0.05);
            Actor a;
            a.mesh = make_shrub(sx, sy, sz);
            a.trajectory.kind = Trajectory::Kind::oscillation;
            a.trajectory.range_override = g.range_min_m < 5.0 || g.range_max_m > 10.0;
            a.trajectory.start = {rng.uniform(-g.shrub_x_max_m, g.shrub_x_max_m),
                                  rng.uniform(g.range_min_m, g.range_max_m), cz};
            a.trajectory.sway_amplitude_m =
                rng.uniform(g.sway_amplitude_min_m, g.sway_amplitude_max_m);
            a.trajectory.sway_freq_hz = rng.uniform(g.sway_freq_min_hz, g.sway_freq_max_hz);
            a.trajectory.sway_phase_rad = rng.uniform(0.0, 2.0 * M_PI);
            int n_gusts = static_cast<int>(rng.uniform_int(g.gust_count_min, g.gust_count_max));
            for (int q = 0; q < n_gusts; ++q)
                a.trajectory.gusts.push_back({rng.uniform(0.0, duration),
                                              rng.uniform(g.gust_sigma_min_s, g.gust_sigma_max_s),
                                              rng.uniform(g.gust_weight_min, g.gust_weight_max)});
            double sign = rng.coin() ? 1.0 : -1.0;
            a.t_obj_k = cfg.radiometry.t_background_k +
                        sign * rng.uniform(g.clutter_dt_min_k, g.clutter_dt_max_k);
            range_sum += a.trajectory.start.y;
            spec.actors.push_back(std::move(a));
        }
        spec.meta.range_m = range_sum / n_shrubs;
        return spec;
    }

    Actor a;
    if (cls == ActorClass::human)
        a.mesh = make_human(rng.uniform(g.human_height_min_m, g.human_height_max_m), rng);
    else
        a.mesh = make_animal(rng.uniform(g.animal_height_min_m, g.animal_height_max_m), rng);
    a.t_obj_k = rng.uniform(g.intruder_t_obj_min_k, g.intruder_t_obj_max_k);

    const double r_mid = rng.uniform(g.range_min_m, g.range_max_m);
    const double speed = rng.uniform(g.speed_min_mps, g.speed_max_mps);
    const int direction = rng.coin() ? +1 : -1;
    double theta = rng.uniform(-g.theta_max_rad, g.theta_max_rad);
    const double x_act = r_mid * std::tan(fan_limit_rad(cfg.tower)) +
                         (a.mesh.bbox().hi.x - a.mesh.bbox().lo.x);
    // Clamp heading so the walk stays inside the 5-10 m band end to end.
    const double t_max = std::max(std::min(r_mid - 5.05, 9.9 - r_mid) / x_act, 0.01);
    if (std::abs(std::tan(theta)) > t_max)
        theta = std::copysign(std::atan(t_max), theta);

    const double t_mid = duration * (0.5 + g.event_window_fraction * (rng.uniform() - 0.5));
    Trajectory traj;
    traj.kind = Trajectory::Kind::line;
    traj.speed_mps = speed;
    traj.theta_rad = theta;
    traj.direction = direction;
    traj.start = {-direction * speed * std::cos(theta) * t_mid,
                  r_mid - speed * std::sin(theta) * t_mid, 0.0};
    const double t_half = x_act / (speed * std::cos(theta));
    traj.active_from_s = t_mid - t_half;
    traj.active_until_s = t_mid + t_half;
    traj.range_override = g.speed_min_mps < 1.0 || g.speed_max_mps > 3.0 ||
                          g.range_min_m < 5.0 || g.range_max_m > 10.0;
    a.trajectory = traj;
    spec.actors.push_back(std::move(a));

    spec.meta.speed_mps = speed;
    spec.meta.theta_rad = theta;
    spec.meta.range_m = r_mid;
    return spec;
}

DatasetManifest generate_dataset(const DatasetRequest& req, const AppConfig& cfg,
                                 const std::filesystem::path& out_dir, int jobs) {
    if (req.human < 0 || req.animal < 0 || req.clutter < 0)
        throw UsageError("generate_dataset: counts must be >= 0");
    const int total = req.human + req.animal + req.clutter;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create dataset directory " + out_dir.string());

    std::vector<EventMeta> metas(static_cast<size_t>(total));
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            int id = next.fetch_add(1);
            if (id >= total) return;
            try {
                SceneSpec spec = build_event_scene(req, cfg, id);
                Event ev = simulate_event(spec);
                io::write_event_csv(io::event_csv_path(out_dir, id), ev);
                io::write_event_meta(io::event_meta_path(out_dir, id), ev.meta);
                metas[static_cast<size_t>(id)] = ev.meta;
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1 || total <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < std::min<int>(jobs, std::max(total, 1)); ++i)
            pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    DatasetManifest manifest;
    manifest.seed = req.seed;
    manifest.config_hash = cfg.config_hash;
    manifest.counts = {req.human, req.animal, req.clutter};
    std::string run_key = cfg.config_hash + "|" + std::to_string(req.seed) + "|" +
                          std::to_string(req.human) + "," + std::to_string(req.animal) + "," +
                          std::to_string(req.clutter) + "|v" +
                          std::to_string(manifest.format_version);
    manifest.run_hash = to_hex(fnv1a64(run_key));
    for (int id = 0; id < total; ++id)
        manifest.events.push_back({id, metas[static_cast<size_t>(id)].label,
                                   io::event_csv_path(out_dir, id).filename().string(),
                                   io::event_meta_path(out_dir, id).filename().string()});
    io::write_manifest(out_dir / "dataset.json", manifest);
    return manifest;
}

}  // namespace pirsim::scene
