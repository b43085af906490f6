#pragma once
#include <cmath>
#include <cstdint>

namespace vlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }
// counterclockwise perpendicular, (x,y) -> (-y,x)
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

// Uniform cell-centered grid over [x0, x0+nx*dx) x [y0, y0+ny*dy).
// Node (ix,iy) sits at the cell center; quadrature weight is dx*dy.
struct GridGeom {
    int nx = 0, ny = 0;
    double x0 = 0.0, y0 = 0.0;
    double dx = 0.0, dy = 0.0;

    std::int64_t cells() const { return std::int64_t(nx) * ny; }
    double cell_area() const { return dx * dy; }
    double node_x(int ix) const { return x0 + (ix + 0.5) * dx; }
    double node_y(int iy) const { return y0 + (iy + 0.5) * dy; }
    std::int64_t idx(int ix, int iy) const { return std::int64_t(iy) * nx + ix; }
};

} // namespace vlab
