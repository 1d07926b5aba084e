#pragma once

#include <array>
#include <cmath>

namespace pirsim {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    return {v.x / n, v.y / n, v.z / n};
}

struct Vec2 {
    double u = 0.0, w = 0.0;
};

// Axis-aligned rectangle in a 2D plane (focal-plane or VPA coordinates).
struct Rect2 {
    double u0 = 0.0, w0 = 0.0, u1 = 0.0, w1 = 0.0;

    double width() const { return u1 - u0; }
    double height() const { return w1 - w0; }
    double area() const { return width() * height(); }
    bool contains_strict(double u, double w) const {
        return u > u0 && u < u1 && w > w0 && w < w1;
    }
    Rect2 shifted(double du, double dw) const { return {u0 + du, w0 + dw, u1 + du, w1 + dw}; }
};

struct Tri2 {
    Vec2 a, b, c;
};

inline double signed_area(const Tri2& t) {
    return 0.5 * ((t.b.u - t.a.u) * (t.c.w - t.a.w) - (t.c.u - t.a.u) * (t.b.w - t.a.w));
}

}  // namespace pirsim
