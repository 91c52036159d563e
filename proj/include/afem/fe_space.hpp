#pragma once

/// Lowest-order conforming (P1) finite elements with Dirichlet constraints.
///
/// The H-inner product is the Dirichlet form (v, w)_H = ∫ ∇v·∇w. Functions are
/// stored with one coefficient per mesh vertex; the free dofs are the vertices
/// not touching a Dirichlet facet, numbered in vertex-id order.

#include <afem/error.hpp>
#include <afem/geometry.hpp>
#include <afem/linear_solver.hpp>
#include <afem/mesh.hpp>
#include <afem/quadrature.hpp>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <array>
#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

namespace afem {

using ScalarField = std::function<double(Point)>;
/// Boundary data evaluated at a point with the outward unit normal there.
using BoundaryFlux = std::function<double(Point, Vec2)>;

class FESpace {
public:
  explicit FESpace(TriangulationPtr mesh) : mesh_(std::move(mesh)) {
    const Triangulation& m = *mesh_;
    bool has_dirichlet = false;
    std::vector<char> dirichlet(static_cast<std::size_t>(m.n_vertices()), 0);
    for (const BoundaryFacet& f : m.boundary()) {
      if (f.tag != BoundaryTag::dirichlet) continue;
      has_dirichlet = true;
      dirichlet[f.v[0]] = 1;
      dirichlet[f.v[1]] = 1;
    }
    if (!has_dirichlet) throw ConfigurationError("FE space: the mesh has no Dirichlet boundary facet");
    dof_.assign(dirichlet.size(), invalid_index);
    for (Index v = 0; v < m.n_vertices(); ++v) {
      if (dirichlet[v]) continue;
      dof_[v] = static_cast<Index>(free_.size());
      free_.push_back(v);
    }
    area_.resize(static_cast<std::size_t>(m.n_elements()));
    grad_.resize(static_cast<std::size_t>(m.n_elements()));
    for (Index e = 0; e < m.n_elements(); ++e) {
      const auto c = m.corners(e);
      const double a = signed_area(c[0], c[1], c[2]);
      if (!(a > 0.0)) throw AssemblyError("FE space: degenerate element " + std::to_string(e));
      area_[e] = a;
      for (int i = 0; i < 3; ++i) {
        const Point& pj = c[(i + 1) % 3];
        const Point& pk = c[(i + 2) % 3];
        grad_[e][i] = {(pj.y - pk.y) / (2.0 * a), (pk.x - pj.x) / (2.0 * a)};
      }
    }
  }

  [[nodiscard]] const Triangulation& mesh() const noexcept { return *mesh_; }
  [[nodiscard]] const TriangulationPtr& mesh_ptr() const noexcept { return mesh_; }
  [[nodiscard]] Index n_vertices() const noexcept { return mesh_->n_vertices(); }
  [[nodiscard]] Index n_free() const noexcept { return static_cast<Index>(free_.size()); }
  /// Free-dof index of a vertex, or -1 for Dirichlet vertices.
  [[nodiscard]] Index dof(Index vertex) const { return dof_[vertex]; }
  [[nodiscard]] bool is_dirichlet(Index vertex) const { return dof_[vertex] == invalid_index; }
  [[nodiscard]] const std::vector<Index>& free_vertices() const noexcept { return free_; }
  [[nodiscard]] double area(Index e) const { return area_[e]; }
  /// Gradients of the three barycentric coordinates (= hat functions) on element e.
  [[nodiscard]] const std::array<Vec2, 3>& gradients(Index e) const { return grad_[e]; }

  [[nodiscard]] Vec2 gradient(const Vector& values, Index e) const {
    const auto& v = mesh_->element(e).v;
    const auto& g = grad_[e];
    return values[v[0]] * g[0] + values[v[1]] * g[1] + values[v[2]] * g[2];
  }

  [[nodiscard]] Vector restrict_to_free(const Vector& values) const {
    Vector out(n_free());
    for (Index i = 0; i < n_free(); ++i) out[i] = values[free_[i]];
    return out;
  }

  /// Full coefficient vector: free entries from `free_values`, Dirichlet entries from `dirichlet_values`.
  [[nodiscard]] Vector extend_from_free(const Vector& free_values, const Vector& dirichlet_values) const {
    Vector out = dirichlet_values;
    for (Index i = 0; i < n_free(); ++i) out[free_[i]] = free_values[i];
    return out;
  }

private:
  TriangulationPtr mesh_;
  std::vector<Index> dof_;
  std::vector<Index> free_;
  std::vector<double> area_;
  std::vector<std::array<Vec2, 3>> grad_;
};

using FESpacePtr = std::shared_ptr<const FESpace>;

inline FESpacePtr build_space(TriangulationPtr mesh) { return std::make_shared<const FESpace>(std::move(mesh)); }

/// A P1 function: one coefficient per vertex, Dirichlet entries included.
struct FEFunction {
  FESpacePtr space;
  Vector values;

  [[nodiscard]] Vector free_values() const { return space->restrict_to_free(values); }
};

inline FEFunction zero_function(FESpacePtr space) {
  Vector v = Vector::Zero(space->n_vertices());
  return {std::move(space), std::move(v)};
}

/// Nodal interpolant of `u` at every vertex.
inline FEFunction interpolate(FESpacePtr space, const ScalarField& u) {
  Vector v(space->n_vertices());
  for (Index i = 0; i < space->n_vertices(); ++i) v[i] = u(space->mesh().vertex(i));
  return {std::move(space), std::move(v)};
}

/// Element stiffness matrix ∫_T ∇φ_i·∇φ_j for the local vertices of element e.
inline Eigen::Matrix3d local_stiffness(const FESpace& space, Index e) {
  Eigen::Matrix3d k;
  const auto& g = space.gradients(e);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k(i, j) = space.area(e) * dot(g[i], g[j]);
  return k;
}

/// Stiffness matrix over all vertices, without Dirichlet constraints.
inline SparseMatrix assemble_full_stiffness(const FESpace& space) {
  const Triangulation& mesh = space.mesh();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * static_cast<std::size_t>(mesh.n_elements()));
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const auto k = local_stiffness(space, e);
    const auto& v = mesh.element(e).v;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) triplets.emplace_back(v[i], v[j], k(i, j));
  }
  SparseMatrix s(mesh.n_vertices(), mesh.n_vertices());
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

/// Riesz matrix (v, w)_H restricted to the free dofs.
inline SparseMatrix assemble_riesz(const FESpace& space) {
  const Triangulation& mesh = space.mesh();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * static_cast<std::size_t>(mesh.n_elements()));
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const auto k = local_stiffness(space, e);
    const auto& v = mesh.element(e).v;
    for (int i = 0; i < 3; ++i) {
      const Index di = space.dof(v[i]);
      if (di == invalid_index) continue;
      for (int j = 0; j < 3; ++j) {
        const Index dj = space.dof(v[j]);
        if (dj != invalid_index) triplets.emplace_back(di, dj, k(i, j));
      }
    }
  }
  SparseMatrix s(space.n_free(), space.n_free());
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

/// Local index k of a mesh edge in element e, i.e. the edge (v[k], v[k+1]).
inline int local_edge_index(const Triangulation& mesh, Index e, Index edge) {
  const auto& ed = mesh.element_edges(e);
  for (int k = 0; k < 3; ++k) {
    if (ed[k] == edge) return k;
  }
  throw InputError("edge is not an edge of the given element");
}

/// Load functional F(φ_i) = ∫ f φ_i + ∫_{Γ_N} g φ_i for every vertex i.
inline Vector assemble_load_full(const FESpace& space, const ScalarField& f, const BoundaryFlux& g) {
  const Triangulation& mesh = space.mesh();
  Vector b = Vector::Zero(mesh.n_vertices());
  if (f) {
    for (Index e = 0; e < mesh.n_elements(); ++e) {
      const auto c = mesh.corners(e);
      const auto& v = mesh.element(e).v;
      std::array<double, 3> local{0.0, 0.0, 0.0};
      for (const auto& q : triangle_rule_degree5()) {
        const double fq = f(map_barycentric(c, q.barycentric)) * q.weight;
        for (int i = 0; i < 3; ++i) local[i] += fq * q.barycentric[i];
      }
      for (int i = 0; i < 3; ++i) b[v[i]] += space.area(e) * local[i];
    }
  }
  if (g) {
    for (Index edge = 0; edge < mesh.n_edges(); ++edge) {
      const Index facet = mesh.edge_facet(edge);
      if (facet == invalid_index || mesh.boundary()[facet].tag != BoundaryTag::neumann) continue;
      const Index e = mesh.edge_elements(edge)[0];
      const int k = local_edge_index(mesh, e, edge);
      const Index ia = mesh.element(e).v[k];
      const Index ib = mesh.element(e).v[(k + 1) % 3];
      const Point pa = mesh.vertex(ia);
      const Point pb = mesh.vertex(ib);
      const Vec2 n = outward_normal(pa, pb);
      const double len = norm(pb - pa);
      for (const auto& q : edge_rule_gauss3()) {
        const double gq = g(pa + q.t * (pb - pa), n) * q.weight * len;
        b[ia] += gq * (1.0 - q.t);
        b[ib] += gq * q.t;
      }
    }
  }
  return b;
}

/// Load vector restricted to the free dofs.
inline Vector assemble_load(const FESpace& space, const ScalarField& f, const BoundaryFlux& g) {
  return space.restrict_to_free(assemble_load_full(space, f, g));
}

/// ‖v‖_H = ‖∇v‖_{L²(Ω)} with exact P1 gradients.
inline double h_norm(const FEFunction& v) {
  const FESpace& space = *v.space;
  double sum = 0.0;
  for (Index e = 0; e < space.mesh().n_elements(); ++e) {
    const Vec2 g = space.gradient(v.values, e);
    sum += space.area(e) * dot(g, g);
  }
  return std::sqrt(sum);
}

inline double h_distance(const FEFunction& a, const FEFunction& b) {
  if (a.space != b.space) throw InputError("h_distance: functions live on different spaces");
  return h_norm({a.space, a.values - b.values});
}

namespace detail {

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    std::memcpy(&x, &p.x, sizeof x);
    std::memcpy(&y, &p.y, sizeof y);
    return std::hash<std::uint64_t>{}(x * 0x9e3779b97f4a7c15ULL ^ y);
  }
};

} // namespace detail

/// Represents a coarse P1 function on a refinement of its mesh. Vertices that
/// the coarse mesh already has keep their values; bisection midpoints take the
/// mean of their parent edge's endpoints. Dirichlet entries are not reset.
inline FEFunction prolongate(const FEFunction& v, FESpacePtr fine) {
  const Triangulation& coarse_mesh = v.space->mesh();
  const Triangulation& fine_mesh = fine->mesh();
  if (!fine_mesh.has_same_roots(coarse_mesh)) throw InputError("prolongate: meshes are not nested");
  Vector out(fine_mesh.n_vertices());

  const Index nc = coarse_mesh.n_vertices();
  bool prefix = nc <= fine_mesh.n_vertices();
  for (Index i = 0; prefix && i < nc; ++i) prefix = coarse_mesh.vertex(i) == fine_mesh.vertex(i);

  std::unordered_map<Point, Index, detail::PointHash> coarse_id;
  if (!prefix) {
    coarse_id.reserve(static_cast<std::size_t>(nc));
    for (Index i = 0; i < nc; ++i) coarse_id.emplace(coarse_mesh.vertex(i), i);
  }
  Index matched = 0;
  for (Index i = 0; i < fine_mesh.n_vertices(); ++i) {
    Index c = invalid_index;
    if (prefix) {
      if (i < nc) c = i;
    } else if (const auto it = coarse_id.find(fine_mesh.vertex(i)); it != coarse_id.end()) {
      c = it->second;
    }
    if (c != invalid_index) {
      out[i] = v.values[c];
      ++matched;
      continue;
    }
    const auto& p = fine_mesh.vertex_parents(i);
    if (p[0] == invalid_index || p[0] >= i || p[1] >= i)
      throw InputError("prolongate: fine mesh is not a refinement of the coarse mesh");
    out[i] = 0.5 * (out[p[0]] + out[p[1]]);
  }
  if (matched != nc) throw InputError("prolongate: coarse vertex missing from the fine mesh");
  return {std::move(fine), std::move(out)};
}

} // namespace afem
