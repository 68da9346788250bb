#pragma once

#include <cmath>
#include <optional>
#include <utility>

namespace trigonal {

struct Vec2 {
  double x = 0, y = 0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
};

inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Signed area of triangle (a,b,c); positive for counterclockwise order.
inline double orient2d(Vec2 a, Vec2 b, Vec2 c) {
  return (b - a).cross(c - a);
}

struct Vec3 {
  double x = 0, y = 0, z = 0;
  Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double dist(Vec3 a, Vec3 b) { return (a - b).norm(); }

// Intersection of segments [a,b] and [c,d], parameters s,t in [0,1] with
// a+(b-a)s = c+(d-c)t. Proper transversal crossings only; collinear pairs
// are handled separately by the arrangement code.
struct SegHit {
  double s, t;
};
inline std::optional<SegHit> segment_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d,
                                               double eps_area) {
  double d1 = orient2d(a, b, c);
  double d2 = orient2d(a, b, d);
  double d3 = orient2d(c, d, a);
  double d4 = orient2d(c, d, b);
  if (std::abs(d1) <= eps_area && std::abs(d2) <= eps_area)
    return std::nullopt;  // (near-)collinear
  if ((d1 > eps_area && d2 > eps_area) || (d1 < -eps_area && d2 < -eps_area))
    return std::nullopt;
  if ((d3 > eps_area && d4 > eps_area) || (d3 < -eps_area && d4 < -eps_area))
    return std::nullopt;
  double denom = d1 - d2;  // = (b-a) x (d-c)
  if (denom == 0) return std::nullopt;
  double t = d1 / denom;
  double denom2 = d3 - d4;
  if (denom2 == 0) return std::nullopt;
  double s = d3 / denom2;
  if (s < -1e-12 || s > 1 + 1e-12 || t < -1e-12 || t > 1 + 1e-12)
    return std::nullopt;
  return SegHit{std::clamp(s, 0.0, 1.0), std::clamp(t, 0.0, 1.0)};
}

}  // namespace trigonal
