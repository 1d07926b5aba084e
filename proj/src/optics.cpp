#include "pirsim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pirsim/util.hpp"

namespace pirsim::optics {

Vec3 LensSystem::lenslet_axis(int k) const {
    double a = lenslet_azimuths_rad.at(static_cast<size_t>(k));
    return {std::sin(a), std::cos(a), 0.0};
}

Vec3 LensSystem::lenslet_center(int k) const {
    return mount() + focal_length_m * lenslet_axis(k);
}

void LensSystem::validate() const {
    if (focal_length_m <= 0.0) throw ConfigError("lens " + id + ": focal_length_m must be > 0");
    if (aperture_area_m2 <= 0.0) throw ConfigError("lens " + id + ": aperture_area_m2 must be > 0");
    if (transmission <= 0.0 || transmission > 1.0)
        throw ConfigError("lens " + id + ": transmission must be in (0,1]");
    if (filter_fraction <= 0.0 || filter_fraction > 1.0)
        throw ConfigError("lens " + id + ": filter_fraction must be in (0,1]");
    if (kind == Kind::spot && lenslet_azimuths_rad.size() != 1)
        throw ConfigError("lens " + id + ": spot lens must have exactly 1 lenslet");
    if (kind == Kind::multi && lenslet_azimuths_rad.size() < 2)
        throw ConfigError("lens " + id + ": multi lens needs >= 2 lenslets");
}

const LensSystem& SensorTowerConfig::lens_for(const ChannelConfig& ch) const {
    auto it = lenses.find(ch.lens_id);
    if (it == lenses.end())
        throw ConfigError("channel " + ch.name + " references unknown lens " + ch.lens_id);
    return it->second;
}

const ChannelConfig* SensorTowerConfig::find_channel(const std::string& name) const {
    for (const auto& ch : channels)
        if (ch.name == name) return &ch;
    return nullptr;
}

namespace {

void validate_pair(const std::string& channel, const PixelPair& p) {
    const Rect2& a = p.positive_rect;
    const Rect2& b = p.negative_rect;
    if (a.width() <= 0 || a.height() <= 0 || b.width() <= 0 || b.height() <= 0)
        throw ConfigError("channel " + channel + ": empty pixel rectangle");
    bool disjoint = a.u1 <= b.u0 || b.u1 <= a.u0 || a.w1 <= b.w0 || b.w1 <= a.w0;
    if (!disjoint) throw ConfigError("channel " + channel + ": pixel rectangles overlap");
    auto close = [](double x, double y) { return std::abs(x - y) < 1e-12; };
    if (!close(a.width(), b.width()) || !close(a.height(), b.height()))
        throw ConfigError("channel " + channel + ": pixel rectangles are not congruent");
}

}  // namespace

void SensorTowerConfig::validate() const {
    if (sample_rate_hz <= 0) throw ConfigError("sample_rate_hz must be > 0");
    if (samples_per_event < 8) throw ConfigError("samples_per_event must be >= 8");
    std::set<std::string> seen;
    for (const auto& ch : channels) {
        if (!seen.insert(ch.name).second)
            throw ConfigError("duplicate channel " + ch.name);
        const LensSystem& lens = lens_for(ch);
        lens.validate();
        validate_pair(ch.name, ch.pair);
        double aperture_radius = std::sqrt(lens.aperture_area_m2 / M_PI);
        if (std::abs(ch.pair.vertical_offset_m) >= aperture_radius)
            throw ConfigError("channel " + ch.name + ": vertical offset exceeds aperture radius");
    }
}

void SensorTowerConfig::validate_full() const {
    validate();
    if (channels.size() != 8) throw ConfigError("tower requires exactly 8 channels");
    for (size_t i = 0; i < kChannelOrder.size(); ++i)
        if (channels[i].name != kChannelOrder[i])
            throw ConfigError("channel order must be A,B,C,D,L1,L2,R1,R2");
    auto shared = [&](const char* a, const char* b) {
        if (find_channel(a)->lens_id != find_channel(b)->lens_id)
            throw ConfigError(std::string("channels ") + a + "," + b + " must share a lens");
    };
    shared("A", "B");
    shared("C", "D");
    shared("L1", "L2");
    shared("R1", "R2");
    if (lens_for(*find_channel("A")).kind != LensSystem::Kind::multi ||
        lens_for(*find_channel("C")).kind != LensSystem::Kind::multi)
        throw ConfigError("A,B and C,D must use multi lenses");
    if (lens_for(*find_channel("L1")).kind != LensSystem::Kind::spot ||
        lens_for(*find_channel("R1")).kind != LensSystem::Kind::spot)
        throw ConfigError("L and R columns must use spot lenses");
}

std::vector<VirtualBeam> build_virtual_beams(const SensorTowerConfig& config) {
    config.validate();
    std::vector<VirtualBeam> beams;
    for (const auto& ch : config.channels) {
        const LensSystem& lens = config.lens_for(ch);
        for (const Rect2* rect : {&ch.pair.positive_rect, &ch.pair.negative_rect}) {
            if (rect->contains_strict(0.0, 0.0))
                throw ConfigError("channel " + ch.name +
                                  ": pixel rectangle straddles the optical axis foot point");
        }
        const Vec3 mount = lens.mount();
        for (size_t k = 0; k < lens.lenslet_azimuths_rad.size(); ++k) {
            const Vec3 pinhole = lens.lenslet_center(static_cast<int>(k));
            for (int pol : {+1, -1}) {
                const Rect2& r = pol > 0 ? ch.pair.positive_rect : ch.pair.negative_rect;
                VirtualBeam beam;
                beam.channel = ch.name;
                beam.lenslet_index = static_cast<int>(k);
                beam.polarity = pol;
                beam.origin = pinhole;
                const std::array<Vec2, 4> corners = {
                    Vec2{r.u0, r.w0}, Vec2{r.u1, r.w0}, Vec2{r.u1, r.w1}, Vec2{r.u0, r.w1}};
                for (int i = 0; i < 4; ++i) {
                    Vec3 p = mount + Vec3{corners[i].u, 0.0, corners[i].w};
                    beam.pixel_corners[i] = p;
                    beam.corner_dirs[i] = normalized(pinhole - p);
                }
                beams.push_back(std::move(beam));
            }
        }
    }
    return beams;
}

double VpaQuad::area() const {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Vec2& p = corners[i];
        const Vec2& q = corners[(i + 1) % 4];
        s += p.u * q.w - q.u * p.w;
    }
    return std::abs(s) * 0.5;
}

double VpaQuad::min_z() const {
    double z = corners[0].w;
    for (const auto& c : corners) z = std::min(z, c.w);
    return z;
}

double VpaQuad::max_z() const {
    double z = corners[0].w;
    for (const auto& c : corners) z = std::max(z, c.w);
    return z;
}

std::vector<VpaQuad> vpa_at_plane(const std::vector<VirtualBeam>& beams, double range_m) {
    if (range_m <= 0.0) throw std::domain_error("vpa_at_plane: range must be > 0");
    for (const auto& b : beams)
        if (std::abs(b.origin.y - range_m) < 1e-12)
            throw std::domain_error("vpa_at_plane: plane passes through an optical center");
    std::vector<VpaQuad> out;
    out.reserve(beams.size());
    for (size_t i = 0; i < beams.size(); ++i) {
        const VirtualBeam& b = beams[i];
        VpaQuad q;
        q.beam_index = static_cast<int>(i);
        for (int c = 0; c < 4; ++c) {
            const Vec3& d = b.corner_dirs[c];
            if (d.y <= 1e-12) {  // ray never reaches the plane
                q.parallel = true;
                break;
            }
            double t = (range_m - b.origin.y) / d.y;
            Vec3 p = b.origin + t * d;
            q.corners[c] = {p.x, p.z};
        }
        out.push_back(q);
    }
    return out;
}

RowSeparationReport check_row_separation(const SensorTowerConfig& config,
                                         double r_min_m, double r_max_m) {
    RowSeparationReport rep;
    const ChannelConfig* row_b = config.find_channel("B");
    const ChannelConfig* row_c = config.find_channel("C");
    if (row_b == nullptr || row_c == nullptr) {
        rep.vacuous = true;
        return rep;
    }
    SensorTowerConfig sub = config;
    sub.channels = {*row_b, *row_c};
    auto beams = build_virtual_beams(sub);

    // Corner heights are linear in range, so the gap (a concave function)
    // attains its minimum at an endpoint; midpoints are sampled anyway.
    bool first = true;
    const int steps = 32;
    for (int i = 0; i <= steps; ++i) {
        double r = r_min_m + (r_max_m - r_min_m) * i / steps;
        auto quads = vpa_at_plane(beams, r);
        double b_bottom = 1e300, c_top = -1e300;
        for (const auto& q : quads) {
            if (q.parallel) continue;
            const auto& beam = beams[static_cast<size_t>(q.beam_index)];
            if (beam.channel == "B") b_bottom = std::min(b_bottom, q.min_z());
            if (beam.channel == "C") c_top = std::max(c_top, q.max_z());
        }
        double gap = b_bottom - c_top;
        if (first || gap < rep.min_gap_m) {
            rep.min_gap_m = gap;
            rep.at_range_m = r;
            first = false;
        }
    }
    return rep;
}

}  // namespace pirsim::optics
