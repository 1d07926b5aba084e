#pragma once

// Test-only exact area of a union of triangles, independent of the
// rasterizer: slab decomposition at every vertex height and every pairwise
// edge intersection. Within a slab no two edges cross and no interval
// endpoints swap order, so the union length is linear in height and the
// midpoint sample integrates each slab exactly.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pirsim/geometry.hpp"

namespace pirsim_test {

inline double exact_union_area(const std::vector<pirsim::Tri2>& tris) {
    using pirsim::Tri2;
    using pirsim::Vec2;
    std::vector<double> breaks;
    auto edges_of = [](const Tri2& t) {
        return std::array<std::pair<Vec2, Vec2>, 3>{
            std::make_pair(t.a, t.b), std::make_pair(t.b, t.c), std::make_pair(t.c, t.a)};
    };
    for (const auto& t : tris) {
        breaks.push_back(t.a.w);
        breaks.push_back(t.b.w);
        breaks.push_back(t.c.w);
    }
    // pairwise edge intersections
    for (size_t i = 0; i < tris.size(); ++i) {
        for (size_t j = i + 1; j < tris.size(); ++j) {
            for (const auto& [p1, q1] : edges_of(tris[i])) {
                for (const auto& [p2, q2] : edges_of(tris[j])) {
                    double d1u = q1.u - p1.u, d1w = q1.w - p1.w;
                    double d2u = q2.u - p2.u, d2w = q2.w - p2.w;
                    double den = d1u * d2w - d1w * d2u;
                    if (std::abs(den) < 1e-15) continue;
                    double s = ((p2.u - p1.u) * d2w - (p2.w - p1.w) * d2u) / den;
                    double t = ((p2.u - p1.u) * d1w - (p2.w - p1.w) * d1u) / den;
                    if (s >= 0 && s <= 1 && t >= 0 && t <= 1) breaks.push_back(p1.w + s * d1w);
                }
            }
        }
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-13; }),
                 breaks.end());

    double area = 0.0;
    for (size_t s = 0; s + 1 < breaks.size(); ++s) {
        double w0 = breaks[s], w1 = breaks[s + 1];
        double wm = 0.5 * (w0 + w1);
        // union of the triangles' u-intervals at the slab midline
        std::vector<std::pair<double, double>> spans;
        for (const auto& t : tris) {
            double lo = 1e300, hi = -1e300;
            int hits = 0;
            for (const auto& [p, q] : edges_of(t)) {
                if ((p.w - wm) * (q.w - wm) > 0 || p.w == q.w) continue;
                double u = p.u + (wm - p.w) * (q.u - p.u) / (q.w - p.w);
                lo = std::min(lo, u);
                hi = std::max(hi, u);
                ++hits;
            }
            if (hits >= 2 && lo <= hi) spans.emplace_back(lo, hi);
        }
        if (spans.empty()) continue;
        std::sort(spans.begin(), spans.end());
        double len = 0, cur_lo = spans[0].first, cur_hi = spans[0].second;
        for (size_t i = 1; i < spans.size(); ++i) {
            if (spans[i].first > cur_hi) {
                len += cur_hi - cur_lo;
                cur_lo = spans[i].first;
                cur_hi = spans[i].second;
            } else {
                cur_hi = std::max(cur_hi, spans[i].second);
            }
        }
        len += cur_hi - cur_lo;
        area += len * (w1 - w0);
    }
    return area;
}

}  // namespace pirsim_test
