#pragma once

/// Z-shaped benchmark: Ω = (−1,1)² minus the closed triangle (0,0),(1,0),(1,−1),
/// reentrant angle 7π/4 at the origin, with the singular solution
/// u⋆ = r^β cos(βφ), β = 4/7, and the constant-source problem.

#include <afem/adaptive.hpp>
#include <afem/error.hpp>
#include <afem/fe_space.hpp>
#include <afem/mesh.hpp>
#include <afem/nonlinear_operator.hpp>
#include <afem/quadrature.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

namespace afem {

enum class ZShapeBoundary {
  mixed,    // Neumann on the two edges meeting at the reentrant corner
  dirichlet // Dirichlet everywhere
};

/// 14 triangles of area 1/4: three unit squares cut along both diagonals and
/// the remaining triangle halved through the midpoint of its reentrant edge.
inline Triangulation build_zshape(ZShapeBoundary boundary = ZShapeBoundary::mixed) {
  std::vector<Point> v{{0, 0},  {1, 0},  {1, 1},   {0, 1},  {-1, 1},  {-1, 0},   {-1, -1},
                       {0, -1}, {1, -1}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}, {-0.5, -0.5}};
  std::vector<std::array<Index, 3>> t{{0, 1, 10}, {1, 2, 10},  {2, 3, 10},  {3, 0, 10}, {3, 4, 11},
                                      {4, 5, 11}, {5, 0, 11},  {0, 3, 11},  {5, 6, 12}, {6, 7, 12},
                                      {7, 0, 12}, {0, 5, 12},  {0, 7, 9},   {7, 8, 9}};
  const BoundaryTag reentrant = boundary == ZShapeBoundary::mixed ? BoundaryTag::neumann : BoundaryTag::dirichlet;
  std::vector<BoundaryFacet> b{{{1, 2}, BoundaryTag::dirichlet}, {{2, 3}, BoundaryTag::dirichlet},
                               {{3, 4}, BoundaryTag::dirichlet}, {{4, 5}, BoundaryTag::dirichlet},
                               {{5, 6}, BoundaryTag::dirichlet}, {{6, 7}, BoundaryTag::dirichlet},
                               {{7, 8}, BoundaryTag::dirichlet}, {{0, 1}, reentrant},
                               {{8, 9}, reentrant},              {{9, 0}, reentrant}};
  return make_initial_mesh(std::move(v), std::move(t), std::move(b));
}

inline constexpr double zshape_beta = 4.0 / 7.0;

struct ExactValue {
  double value = 0.0;
  Vec2 gradient;
  bool singular = false; // r = 0: the gradient is unbounded and not reported
};

/// Polar angle in [0, 2π), measured counterclockwise from the positive x-axis.
inline double zshape_angle(Point p) {
  double phi = std::atan2(p.y, p.x);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  return phi;
}

inline ExactValue exact_solution_known(Point p) {
  constexpr double beta = zshape_beta;
  const double r = norm(p);
  if (r == 0.0) return {0.0, {}, true};
  const double phi = zshape_angle(p);
  const double rb = std::pow(r, beta);
  const double s = beta * rb / r;
  return {rb * std::cos(beta * phi), {s * std::cos((beta - 1.0) * phi), -s * std::sin((beta - 1.0) * phi)}, false};
}

struct ManufacturedData {
  ScalarField f;
  BoundaryFlux g;
};

/// f = −div(μ(|∇u⋆|²)∇u⋆) and g = μ(|∇u⋆|²)∂_n u⋆ for an x-independent μ.
/// u⋆ is harmonic and |∇u⋆|² = β² r^{2β−2} is radial, so only the μ′ term survives.
inline ManufacturedData manufactured_data(const Nonlinearity& nl) {
  if (nl.x_dependent) throw ConfigurationError("manufactured_data: nonlinearity must not depend on x");
  constexpr double beta = zshape_beta;
  ManufacturedData d;
  d.f = [nl](Point p) {
    const double r = norm(p);
    if (r == 0.0) throw InputError("manufactured_data: f is singular at the origin");
    const double t = beta * beta * std::pow(r, 2.0 * beta - 2.0);
    const double dt_dr = beta * beta * (2.0 * beta - 2.0) * std::pow(r, 2.0 * beta - 3.0);
    const double du_dr = beta * std::pow(r, beta - 1.0) * std::cos(beta * zshape_angle(p));
    return -nl.derivative(p, t) * dt_dr * du_dr;
  };
  d.g = [nl](Point p, Vec2 n) {
    const ExactValue u = exact_solution_known(p);
    if (u.singular) throw InputError("manufactured_data: g is singular at the origin");
    return nl.value(p, dot(u.gradient, u.gradient)) * dot(u.gradient, n);
  };
  return d;
}

/// ‖∇(u⋆ − u)‖_{L²(Ω)}; elements touching the origin use a 3-level composite rule.
inline double h1_error_known(const FESpace& space, const FEFunction& u) {
  const Triangulation& mesh = space.mesh();
  double sum = 0.0;
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const Vec2 gh = space.gradient(u.values, e);
    const auto c = mesh.corners(e);
    const auto integrand = [&](Point x) {
      const Vec2 d = exact_solution_known(x).gradient - gh;
      return dot(d, d);
    };
    const bool at_origin = norm(c[0]) == 0.0 || norm(c[1]) == 0.0 || norm(c[2]) == 0.0;
    sum += at_origin ? integrate_triangle_composite(c, 3, integrand) : integrate_triangle(c, integrand);
  }
  return std::sqrt(sum);
}

struct ProblemSpec {
  std::string name;
  Triangulation mesh;
  std::string nonlinearity;
  ProblemPtr problem;
  bool known_solution = false;

  /// ‖∇(u⋆ − u)‖ for the known-solution case, empty otherwise.
  [[nodiscard]] ErrorFunctional error_functional() const {
    if (!known_solution) return {};
    return [](const FEFunction& u) { return h1_error_known(*u.space, u); };
  }
};

/// "zshape-known": μ(t) = 2 + 1/√(1+t), mixed boundary, data manufactured from u⋆
/// with its Dirichlet trace interpolated. "zshape-unknown": μ(t) = 1 + arctan t,
/// f ≡ 1, homogeneous Dirichlet data on the whole boundary.
inline ProblemSpec make_problem_spec(std::string_view name) {
  if (name == "zshape-known") {
    Nonlinearity nl = builtin_known_solution();
    ManufacturedData data = manufactured_data(nl);
    ProblemSpec s{std::string(name), build_zshape(ZShapeBoundary::mixed), nl.name, nullptr, true};
    s.problem = make_problem(std::move(nl), std::move(data.f), std::move(data.g),
                             [](Point p) { return exact_solution_known(p).value; });
    return s;
  }
  if (name == "zshape-unknown") {
    Nonlinearity nl = builtin_arctan();
    ProblemSpec s{std::string(name), build_zshape(ZShapeBoundary::dirichlet), nl.name, nullptr, false};
    s.problem = make_problem(std::move(nl), [](Point) { return 1.0; });
    return s;
  }
  throw InputError("unknown problem '" + std::string(name) + "'");
}

} // namespace afem
