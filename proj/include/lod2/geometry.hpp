#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace lod2 {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
};

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Rotates v clockwise by `deg` degrees in a frame with x east, y north.
inline Vec2 rotate_cw(const Vec2& v, double deg) {
    double a = deg2rad(deg);
    double c = std::cos(a), s = std::sin(a);
    return {v.x * c + v.y * s, -v.x * s + v.y * c};
}

// Unit direction of an orientation given in degrees clockwise from north.
inline Vec2 orientation_dir(double deg) {
    double a = deg2rad(deg);
    return {std::sin(a), std::cos(a)};
}

// Orientation (degrees clockwise from north, in [0, 180)) of a direction vector.
inline double direction_orientation(const Vec2& d) {
    double a = rad2deg(std::atan2(d.x, d.y));  // cw from north
    a = std::fmod(a, 180.0);
    if (a < 0) a += 180.0;
    if (a >= 180.0) a -= 180.0;
    return a;
}

inline double normalize_angle_180(double deg) {
    double a = std::fmod(deg, 180.0);
    if (a < 0) a += 180.0;
    if (a >= 180.0) a -= 180.0;  // guard against -1e-17 folding to 180
    return a;
}

// Circular distance between two orientations, modulo 180 degrees. Result in [0, 90].
inline double angle_diff_180(double a, double b) {
    double d = std::fabs(normalize_angle_180(a) - normalize_angle_180(b));
    return std::min(d, 180.0 - d);
}

// Circular distance modulo 90 degrees (orthogonal orientations identified).
inline double angle_diff_90(double a, double b) {
    double d = std::fmod(std::fabs(a - b), 90.0);
    return std::min(d, 90.0 - d);
}

struct Segment {
    Vec2 a, b;
    double length() const { return (b - a).norm(); }
    Vec2 midpoint() const { return {(a.x + b.x) * 0.5, (a.y + b.y) * 0.5}; }
    double orientation() const { return direction_orientation(b - a); }
};

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 <= 0) return (p - a).norm();
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    Vec2 proj = a + ab * t;
    return (p - proj).norm();
}

inline double point_line_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len = ab.norm();
    if (len <= 0) return (p - a).norm();
    return std::fabs(ab.cross(p - a)) / len;
}

// Signed area of a closed ring (positive = counterclockwise with y north).
inline double ring_area(const std::vector<Vec2>& ring) {
    double s = 0.0;
    size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = ring[i];
        const Vec2& q = ring[(i + 1) % n];
        s += p.cross(q);
    }
    return 0.5 * s;
}

inline Vec2 ring_centroid(const std::vector<Vec2>& ring) {
    double a = 0.0, cx = 0.0, cy = 0.0;
    size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = ring[i];
        const Vec2& q = ring[(i + 1) % n];
        double w = p.cross(q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if (std::fabs(a) < 1e-12) {
        Vec2 m{0, 0};
        for (const auto& p : ring) m = m + p;
        return m * (1.0 / std::max<size_t>(1, n));
    }
    return {cx / (3.0 * a), cy / (3.0 * a)};
}

inline bool point_in_ring(const Vec2& p, const std::vector<Vec2>& ring) {
    bool in = false;
    size_t n = ring.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y) &&
            p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
            in = !in;
    }
    return in;
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        double v = (q - p).cross(r - p);
        if (v > 1e-12) return 1;
        if (v < -1e-12) return -1;
        return 0;
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4;
}

// True if the closed ring has a proper self-intersection between non-adjacent edges.
inline bool ring_self_intersects(const std::vector<Vec2>& ring) {
    size_t n = ring.size();
    if (n < 4) return false;
    for (size_t i = 0; i < n; ++i) {
        size_t i2 = (i + 1) % n;
        for (size_t j = i + 1; j < n; ++j) {
            size_t j2 = (j + 1) % n;
            if (j == i || j2 == i || j == i2) continue;
            if (segments_intersect(ring[i], ring[i2], ring[j], ring[j2])) return true;
        }
    }
    return false;
}

// Infinite line through `point` with direction of `orientation_deg` (cw from north).
struct OrientedLine {
    Vec2 point;
    double orientation_deg = 0.0;

    Vec2 dir() const { return orientation_dir(orientation_deg); }

    // Signed perpendicular offset of p from the line.
    double offset(const Vec2& p) const { return dir().cross(p - point); }
};

// Intersection of two oriented lines; returns false if near-parallel.
inline bool line_intersection(const OrientedLine& l1, const OrientedLine& l2, Vec2& out) {
    Vec2 d1 = l1.dir(), d2 = l2.dir();
    double den = d1.cross(d2);
    if (std::fabs(den) < 1e-9) return false;
    double t = (l2.point - l1.point).cross(d2) / den;
    out = l1.point + d1 * t;
    return true;
}

}  // namespace lod2
