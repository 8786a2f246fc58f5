#pragma once

#include <cmath>

namespace wrsn {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

inline double dist2(Vec2 a, Vec2 b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double dist(Vec2 a, Vec2 b) { return std::sqrt(dist2(a, b)); }

inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

// point advanced from `a` toward `b` by at most `step` meters (clamped at b)
inline Vec2 advance_toward(Vec2 a, Vec2 b, double step, double* moved = nullptr) {
    const double d = dist(a, b);
    if (d <= step) {
        if (moved) *moved = d;
        return b;
    }
    if (moved) *moved = step;
    const double s = step / d;
    return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
}

}  // namespace wrsn
