#pragma once

#include <cmath>
#include <cstdint>

namespace afem {

using Index = std::int32_t;
inline constexpr Index invalid_index = -1;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) noexcept = default;
};

using Point = Vec2;

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
constexpr Vec2 midpoint(Point a, Point b) noexcept { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

/// Signed area of the triangle (a, b, c); positive for counter-clockwise order.
constexpr double signed_area(Point a, Point b, Point c) noexcept { return 0.5 * cross(b - a, c - a); }

/// Outward unit normal of the edge a -> b of a counter-clockwise triangle.
inline Vec2 outward_normal(Point a, Point b) noexcept {
  const Vec2 t = b - a;
  const double len = norm(t);
  return {t.y / len, -t.x / len};
}

} // namespace afem
