#pragma once

#include <afem/geometry.hpp>

#include <array>
#include <cmath>

namespace afem {

struct TriangleQuadraturePoint {
  std::array<double, 3> barycentric;
  double weight; // weights sum to one; multiply by |T|
};

/// Symmetric 7-point rule, exact for polynomials of degree 5.
inline const std::array<TriangleQuadraturePoint, 7>& triangle_rule_degree5() {
  static const std::array<TriangleQuadraturePoint, 7> rule = [] {
    const double s15 = std::sqrt(15.0);
    const double b1 = (6.0 + s15) / 21.0;
    const double a1 = 1.0 - 2.0 * b1;
    const double w1 = (155.0 + s15) / 1200.0;
    const double b2 = (6.0 - s15) / 21.0;
    const double a2 = 1.0 - 2.0 * b2;
    const double w2 = (155.0 - s15) / 1200.0;
    return std::array<TriangleQuadraturePoint, 7>{{
        {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0},
        {{a1, b1, b1}, w1},
        {{b1, a1, b1}, w1},
        {{b1, b1, a1}, w1},
        {{a2, b2, b2}, w2},
        {{b2, a2, b2}, w2},
        {{b2, b2, a2}, w2},
    }};
  }();
  return rule;
}

struct EdgeQuadraturePoint {
  double t; // position along the edge in [0, 1]
  double weight; // weights sum to one; multiply by |E|
};

/// 3-point Gauss-Legendre rule on [0, 1], exact for degree 5.
inline const std::array<EdgeQuadraturePoint, 3>& edge_rule_gauss3() {
  static const std::array<EdgeQuadraturePoint, 3> rule = [] {
    const double d = std::sqrt(15.0) / 10.0;
    return std::array<EdgeQuadraturePoint, 3>{{{0.5 - d, 5.0 / 18.0}, {0.5, 4.0 / 9.0}, {0.5 + d, 5.0 / 18.0}}};
  }();
  return rule;
}

inline Point map_barycentric(const std::array<Point, 3>& c, const std::array<double, 3>& lambda) {
  return {lambda[0] * c[0].x + lambda[1] * c[1].x + lambda[2] * c[2].x,
          lambda[0] * c[0].y + lambda[1] * c[1].y + lambda[2] * c[2].y};
}

/// ∫_T f dx with the degree-5 rule.
template <class F>
double integrate_triangle(const std::array<Point, 3>& c, F&& f) {
  const double area = signed_area(c[0], c[1], c[2]);
  double sum = 0.0;
  for (const auto& q : triangle_rule_degree5()) sum += q.weight * f(map_barycentric(c, q.barycentric));
  return area * sum;
}

/// ∫_T f dx with the degree-5 rule applied on 4^levels congruent subtriangles.
template <class F>
double integrate_triangle_composite(const std::array<Point, 3>& c, int levels, F&& f) {
  if (levels <= 0) return integrate_triangle(c, f);
  const Point m01 = midpoint(c[0], c[1]);
  const Point m12 = midpoint(c[1], c[2]);
  const Point m20 = midpoint(c[2], c[0]);
  return integrate_triangle_composite({c[0], m01, m20}, levels - 1, f) +
         integrate_triangle_composite({m01, c[1], m12}, levels - 1, f) +
         integrate_triangle_composite({m20, m12, c[2]}, levels - 1, f) +
         integrate_triangle_composite({m01, m12, m20}, levels - 1, f);
}

} // namespace afem
