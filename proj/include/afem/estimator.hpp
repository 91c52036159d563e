#pragma once

/// Residual refinement indicators
///   η(T, v)² = h_T² ‖f + div(μ_v ∇v)‖²_T + h_T ‖[μ_v ∂_n v]‖²_{∂T∩Ω}
///            + h_T ‖g − μ_v ∂_n v‖²_{∂T∩Γ_N},   h_T = |T|^{1/2},
/// and Dörfler marking of minimal cardinality.

#include <afem/error.hpp>
#include <afem/fe_space.hpp>
#include <afem/mesh.hpp>
#include <afem/nonlinear_operator.hpp>
#include <afem/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace afem {

struct IndicatorField {
  TriangulationPtr mesh;
  std::vector<double> eta_sq; // η(T, v)² per element
  double total_sq = 0.0;

  [[nodiscard]] double total() const { return std::sqrt(total_sq); }
};

inline IndicatorField compute_indicators(const DiscreteProblem& dp, const FEFunction& v) {
  const FESpace& space = dp.space();
  const Triangulation& mesh = space.mesh();
  const MonotoneProblem& problem = dp.problem();
  const Nonlinearity& mu = problem.nonlinearity;
  const Index ne = mesh.n_elements();

  IndicatorField out{space.mesh_ptr(), std::vector<double>(static_cast<std::size_t>(ne), 0.0), 0.0};
  std::vector<Vec2> grad(static_cast<std::size_t>(ne));
  std::vector<double> t(static_cast<std::size_t>(ne));
  std::vector<Vec2> flux(static_cast<std::size_t>(ne)); // μ_v ∇v, x-independent case
  std::vector<double> h(static_cast<std::size_t>(ne));
  for (Index e = 0; e < ne; ++e) {
    grad[e] = space.gradient(v.values, e);
    t[e] = dot(grad[e], grad[e]);
    h[e] = std::sqrt(space.area(e));
    if (!mu.x_dependent) flux[e] = mu.value(Point{}, t[e]) * grad[e];
  }

  for (Index e = 0; e < ne; ++e) {
    double vol = 0.0;
    if (!mu.x_dependent) {
      vol = dp.source_l2_squared()[e]; // div(μ_v ∇v) vanishes elementwise
    } else {
      vol = integrate_triangle(mesh.corners(e), [&](Point x) {
        const double r = (problem.f ? problem.f(x) : 0.0) + dot(mu.grad_x_mu(x, t[e]), grad[e]);
        return r * r;
      });
    }
    out.eta_sq[e] = h[e] * h[e] * vol;
  }

  const auto flux_at = [&](Index e, Point x) {
    return mu.x_dependent ? mu.value(x, t[e]) * grad[e] : flux[e];
  };

  for (Index edge = 0; edge < mesh.n_edges(); ++edge) {
    const auto& ends = mesh.edge(edge);
    const Point pa = mesh.vertex(ends[0]);
    const Point pb = mesh.vertex(ends[1]);
    const double len = norm(pb - pa);
    const auto& adj = mesh.edge_elements(edge);
    if (adj[1] != invalid_index) {
      const Vec2 n = outward_normal(pa, pb); // sign is irrelevant for the squared jump
      double jump_sq = 0.0;
      if (!mu.x_dependent) {
        const double j = dot(flux[adj[0]] - flux[adj[1]], n);
        jump_sq = j * j * len;
      } else {
        for (const auto& q : edge_rule_gauss3()) {
          const Point x = pa + q.t * (pb - pa);
          const double j = dot(flux_at(adj[0], x) - flux_at(adj[1], x), n);
          jump_sq += q.weight * len * j * j;
        }
      }
      out.eta_sq[adj[0]] += h[adj[0]] * jump_sq;
      out.eta_sq[adj[1]] += h[adj[1]] * jump_sq;
      continue;
    }
    const Index facet = mesh.edge_facet(edge);
    if (mesh.boundary()[facet].tag != BoundaryTag::neumann) continue;
    const Index e = adj[0];
    const int k = local_edge_index(mesh, e, edge);
    const Point a = mesh.vertex(mesh.element(e).v[k]);
    const Point b = mesh.vertex(mesh.element(e).v[(k + 1) % 3]);
    const Vec2 n = outward_normal(a, b);
    double res_sq = 0.0;
    for (const auto& q : edge_rule_gauss3()) {
      const Point x = a + q.t * (b - a);
      const double r = (problem.g ? problem.g(x, n) : 0.0) - dot(flux_at(e, x), n);
      res_sq += q.weight * len * r * r;
    }
    out.eta_sq[e] += h[e] * res_sq;
  }

  out.total_sq = std::accumulate(out.eta_sq.begin(), out.eta_sq.end(), 0.0);
  return out;
}

inline double estimator(const DiscreteProblem& dp, const FEFunction& v) { return compute_indicators(dp, v).total(); }

struct MarkedSet {
  std::vector<Index> elements;
  double theta = 1.0;
};

/// Shortest prefix of the elements sorted by η_T² (descending, ties by id)
/// whose indicators sum to at least θ² η². Any set satisfying the Dörfler
/// criterion has at least this many elements.
inline MarkedSet dorfler_mark(const IndicatorField& ind, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigurationError("dorfler_mark: theta must lie in (0, 1]");
  MarkedSet out{{}, theta};
  const std::size_t n = ind.eta_sq.size();
  if (ind.total_sq == 0.0) return out;
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return ind.eta_sq[a] > ind.eta_sq[b]; });
  // Compare the unmarked tail against (1 − θ²) η², which keeps θ = 1 exact.
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) tail[k] = tail[k + 1] + ind.eta_sq[order[k]];
  const double allowed = (1.0 - theta * theta) * tail[0];
  std::size_t k = 0;
  while (k < n && tail[k] > allowed) ++k;
  out.elements.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

/// η(U, v) = (Σ_{T∈U} η(T, v)²)^{1/2}.
inline double restricted_estimator(const IndicatorField& ind, std::span<const Index> subset) {
  double sum = 0.0;
  for (Index e : subset) {
    if (e < 0 || static_cast<std::size_t>(e) >= ind.eta_sq.size())
      throw InputError("restricted_estimator: unknown element id " + std::to_string(e));
    sum += ind.eta_sq[e];
  }
  return std::sqrt(sum);
}

} // namespace afem
