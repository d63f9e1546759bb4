#pragma once

#include <algorithm>
#include <cmath>

namespace vipguard {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2& operator-=(Vec2 o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double norm_sq() const { return x * x + y * y; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }

    // Returns the vector scaled down to |v| <= limit (unchanged if shorter).
    Vec2 clipped(double limit) const {
        double n = norm();
        if (n <= limit || n == 0.0) return *this;
        return {x * (limit / n), y * (limit / n)};
    }
};

inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Disc {
    Vec2 center;
    double radius = 0.0;
};

// Closest point on the closed segment [a, b] to p.
inline Vec2 closest_point_on_segment(Vec2 a, Vec2 b, Vec2 p) {
    Vec2 ab = b - a;
    double len_sq = ab.norm_sq();
    if (len_sq == 0.0) return a;
    double t = std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
    return a + ab * t;
}

}  // namespace vipguard
