#pragma once

/// Conforming 2D triangulations refined by newest vertex bisection (NVB).
///
/// Element convention: vertex 2 is the newest vertex and the edge (v0, v1)
/// opposite to it is the refinement edge. Every element records its ancestry
/// (root element of the initial mesh plus the child slots taken at each
/// bisection), which is the only link between elements of different meshes
/// of the same refinement family.

#include <afem/error.hpp>
#include <afem/geometry.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace afem {

enum class BoundaryTag : char { dirichlet = 'D', neumann = 'N' };

struct Element {
  std::array<Index, 3> v{};
  friend bool operator==(const Element&, const Element&) = default;
};

struct BoundaryFacet {
  std::array<Index, 2> v{};
  BoundaryTag tag = BoundaryTag::dirichlet;
  friend bool operator==(const BoundaryFacet&, const BoundaryFacet&) = default;
};

/// Position of an element in the bisection forest rooted at the initial mesh.
struct Ancestry {
  Index root = invalid_index;
  std::vector<std::uint8_t> path;

  [[nodiscard]] std::size_t generation() const noexcept { return path.size(); }
  friend bool operator==(const Ancestry&, const Ancestry&) = default;
};

class Triangulation;
using TriangulationPtr = std::shared_ptr<const Triangulation>;

namespace detail {

struct RootMesh {
  std::vector<Point> vertices;
  std::vector<Element> elements;
  std::vector<BoundaryFacet> boundary;
};

inline std::uint64_t edge_key(Index a, Index b) noexcept {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32U) | hi;
}

inline std::string ancestry_key(Index root, std::span<const std::uint8_t> path) {
  std::string key(sizeof(Index) + path.size(), '\0');
  std::memcpy(key.data(), &root, sizeof(Index));
  std::copy(path.begin(), path.end(), key.begin() + sizeof(Index));
  return key;
}

} // namespace detail

class Triangulation {
public:
  /// Takes ownership of an initial mesh. The vertex order of every element is
  /// kept (so edge (0,1) is its refinement edge); clockwise elements are
  /// reoriented by swapping v0 and v1, which preserves the refinement edge.
  Triangulation(std::vector<Point> vertices, std::vector<Element> elements,
                std::vector<BoundaryFacet> boundary)
      : vertices_(std::move(vertices)), elements_(std::move(elements)),
        boundary_(std::move(boundary)) {
    for (const Point& p : vertices_) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw InputError("mesh: non-finite vertex coordinate");
    }
    const auto nv = static_cast<Index>(vertices_.size());
    for (Element& el : elements_) {
      for (Index id : el.v) {
        if (id < 0 || id >= nv) throw InputError("mesh: element references unknown vertex");
      }
      if (el.v[0] == el.v[1] || el.v[1] == el.v[2] || el.v[0] == el.v[2])
        throw InputError("mesh: element with repeated vertex");
      const double a = signed_area(vertices_[el.v[0]], vertices_[el.v[1]], vertices_[el.v[2]]);
      if (!(std::abs(a) > 0.0)) throw InputError("mesh: degenerate element");
      if (a < 0.0) std::swap(el.v[0], el.v[1]);
    }
    for (const BoundaryFacet& f : boundary_) {
      for (Index id : f.v) {
        if (id < 0 || id >= nv) throw InputError("mesh: boundary facet references unknown vertex");
      }
    }
    vertex_parents_.assign(vertices_.size(), {invalid_index, invalid_index});
    ancestry_.resize(elements_.size());
    for (std::size_t i = 0; i < elements_.size(); ++i) ancestry_[i].root = static_cast<Index>(i);
    roots_ = std::make_shared<const detail::RootMesh>(detail::RootMesh{vertices_, elements_, boundary_});
    build_topology();
  }

  [[nodiscard]] Index n_vertices() const noexcept { return static_cast<Index>(vertices_.size()); }
  [[nodiscard]] Index n_elements() const noexcept { return static_cast<Index>(elements_.size()); }
  [[nodiscard]] Index n_edges() const noexcept { return static_cast<Index>(edges_.size()); }

  [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] const Point& vertex(Index i) const { return vertices_[i]; }
  [[nodiscard]] const std::vector<Element>& elements() const noexcept { return elements_; }
  [[nodiscard]] const Element& element(Index e) const { return elements_[e]; }
  [[nodiscard]] const std::vector<BoundaryFacet>& boundary() const noexcept { return boundary_; }
  [[nodiscard]] const Ancestry& ancestry(Index e) const { return ancestry_[e]; }
  [[nodiscard]] std::size_t generation(Index e) const { return ancestry_[e].generation(); }

  /// Endpoints of the edge that was bisected to create vertex i, or {-1,-1} for initial vertices.
  [[nodiscard]] const std::array<Index, 2>& vertex_parents(Index i) const { return vertex_parents_[i]; }

  /// Local edge k of element e joins v[k] and v[(k+1)%3]; local edge 0 is the refinement edge.
  [[nodiscard]] const std::array<Index, 3>& element_edges(Index e) const { return element_edges_[e]; }
  [[nodiscard]] const std::array<Index, 2>& edge(Index i) const { return edges_[i]; }
  /// The one or two elements sharing edge i; the second entry is -1 on the boundary.
  [[nodiscard]] const std::array<Index, 2>& edge_elements(Index i) const { return edge_elements_[i]; }
  /// Boundary facet lying on edge i, or -1 for interior edges.
  [[nodiscard]] Index edge_facet(Index i) const { return edge_facet_[i]; }

  [[nodiscard]] std::array<Point, 3> corners(Index e) const {
    const Element& el = elements_[e];
    return {vertices_[el.v[0]], vertices_[el.v[1]], vertices_[el.v[2]]};
  }

  [[nodiscard]] double area(Index e) const {
    const auto c = corners(e);
    return signed_area(c[0], c[1], c[2]);
  }

  [[nodiscard]] double total_area() const {
    double sum = 0.0;
    for (Index e = 0; e < n_elements(); ++e) sum += area(e);
    return sum;
  }

  [[nodiscard]] bool has_same_roots(const Triangulation& other) const {
    if (roots_ == other.roots_) return true;
    const auto& a = *roots_;
    const auto& b = *other.roots_;
    return a.vertices == b.vertices && a.elements == b.elements;
  }

  /// The initial mesh this triangulation descends from.
  [[nodiscard]] Triangulation initial_mesh() const {
    return Triangulation(roots_->vertices, roots_->elements, roots_->boundary);
  }

private:
  struct Parts {
    std::vector<Point> vertices;
    std::vector<std::array<Index, 2>> vertex_parents;
    std::vector<Element> elements;
    std::vector<Ancestry> ancestry;
    std::vector<BoundaryFacet> boundary;
  };

  Triangulation(Parts parts, std::shared_ptr<const detail::RootMesh> roots)
      : vertices_(std::move(parts.vertices)), vertex_parents_(std::move(parts.vertex_parents)),
        elements_(std::move(parts.elements)), ancestry_(std::move(parts.ancestry)),
        boundary_(std::move(parts.boundary)), roots_(std::move(roots)) {
    build_topology();
  }

  void build_topology() {
    const std::size_t ne = elements_.size();
    std::vector<std::pair<std::uint64_t, Index>> keys;
    keys.reserve(3 * ne);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& v = elements_[e].v;
      for (int k = 0; k < 3; ++k)
        keys.emplace_back(detail::edge_key(v[k], v[(k + 1) % 3]), static_cast<Index>(3 * e + k));
    }
    std::sort(keys.begin(), keys.end());

    element_edges_.assign(ne, {invalid_index, invalid_index, invalid_index});
    edges_.clear();
    edge_elements_.clear();
    for (std::size_t i = 0; i < keys.size();) {
      std::size_t j = i;
      while (j < keys.size() && keys[j].first == keys[i].first) ++j;
      if (j - i > 2) throw InputError("mesh: edge shared by more than two elements");
      const auto id = static_cast<Index>(edges_.size());
      const std::uint64_t k = keys[i].first;
      edges_.push_back({static_cast<Index>(k >> 32U), static_cast<Index>(k & 0xffffffffU)});
      std::array<Index, 2> adj{invalid_index, invalid_index};
      for (std::size_t m = i; m < j; ++m) {
        const Index slot = keys[m].second;
        element_edges_[slot / 3][slot % 3] = id;
        adj[m - i] = slot / 3;
      }
      edge_elements_.push_back(adj);
      i = j;
    }

    edge_facet_.assign(edges_.size(), invalid_index);
    std::unordered_map<std::uint64_t, Index> edge_of;
    edge_of.reserve(edges_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i)
      edge_of.emplace(detail::edge_key(edges_[i][0], edges_[i][1]), static_cast<Index>(i));
    for (std::size_t f = 0; f < boundary_.size(); ++f) {
      const auto it = edge_of.find(detail::edge_key(boundary_[f].v[0], boundary_[f].v[1]));
      if (it == edge_of.end()) throw InputError("mesh: boundary facet is not an element edge");
      if (edge_elements_[it->second][1] != invalid_index)
        throw InputError("mesh: boundary facet on an interior edge");
      if (edge_facet_[it->second] != invalid_index) throw InputError("mesh: duplicate boundary facet");
      edge_facet_[it->second] = static_cast<Index>(f);
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (edge_elements_[i][1] == invalid_index && edge_facet_[i] == invalid_index)
        throw InputError("mesh: boundary edge without facet (hanging node or missing tag)");
    }
  }

  std::vector<Point> vertices_;
  std::vector<std::array<Index, 2>> vertex_parents_;
  std::vector<Element> elements_;
  std::vector<Ancestry> ancestry_;
  std::vector<BoundaryFacet> boundary_;
  std::shared_ptr<const detail::RootMesh> roots_;

  std::vector<std::array<Index, 3>> element_edges_;
  std::vector<std::array<Index, 2>> edges_;
  std::vector<std::array<Index, 2>> edge_elements_;
  std::vector<Index> edge_facet_;

  friend Triangulation refine(const Triangulation&, std::span<const Index>);
  friend Triangulation overlay(const Triangulation&, const Triangulation&);
};

/// Builds an initial mesh, choosing each element's refinement edge as its
/// longest edge (ties: the edge whose opposite vertex has the smallest id).
inline Triangulation make_initial_mesh(std::vector<Point> vertices, std::vector<std::array<Index, 3>> triangles,
                                       std::vector<BoundaryFacet> boundary) {
  std::vector<Element> elements;
  elements.reserve(triangles.size());
  for (auto t : triangles) {
    for (Index id : t) {
      if (id < 0 || id >= static_cast<Index>(vertices.size()))
        throw InputError("mesh: element references unknown vertex");
    }
    if (signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < 0.0) std::swap(t[1], t[2]);
    int best = 0;
    double best_len = -1.0;
    for (int k = 0; k < 3; ++k) {
      // edge opposite local vertex k
      const Vec2 d = vertices[t[(k + 1) % 3]] - vertices[t[(k + 2) % 3]];
      const double len = dot(d, d);
      if (len > best_len || (len == best_len && t[k] < t[best])) {
        best = k;
        best_len = len;
      }
    }
    elements.push_back({{t[(best + 1) % 3], t[(best + 2) % 3], t[best]}});
  }
  return Triangulation(std::move(vertices), std::move(elements), std::move(boundary));
}

/// h_T = |T|^{1/2}.
inline double element_size(const Triangulation& mesh, Index e) { return std::sqrt(mesh.area(e)); }

namespace detail {

// (a, b, c) with refinement edge (a, b) and midpoint m -> children (c, a, m), (b, c, m).
inline std::array<Element, 2> bisect(const Element& el, Index m) {
  return {Element{{el.v[2], el.v[0], m}}, Element{{el.v[1], el.v[2], m}}};
}

inline std::vector<std::uint8_t> extend(const std::vector<std::uint8_t>& path, std::uint8_t slot) {
  std::vector<std::uint8_t> out;
  out.reserve(path.size() + 2);
  out = path;
  out.push_back(slot);
  return out;
}

} // namespace detail

/// Coarsest conforming NVB refinement in which every marked element is bisected.
///
/// Closure marks edges: an element with any marked edge gets its refinement
/// edge marked, until no element changes. Each element is then bisected once
/// along its refinement edge and its children once more along each other
/// marked parent edge.
inline Triangulation refine(const Triangulation& mesh, std::span<const Index> marked) {
  const Index ne = mesh.n_elements();
  std::vector<char> edge_marked(static_cast<std::size_t>(mesh.n_edges()), 0);
  std::vector<Index> stack;
  for (Index e : marked) {
    if (e < 0 || e >= ne) throw InputError("refine: invalid element id " + std::to_string(e));
    const Index r = mesh.element_edges(e)[0];
    if (!edge_marked[r]) {
      edge_marked[r] = 1;
      stack.push_back(r);
    }
  }
  while (!stack.empty()) {
    const Index edge = stack.back();
    stack.pop_back();
    for (Index t : mesh.edge_elements(edge)) {
      if (t == invalid_index) continue;
      const Index r = mesh.element_edges(t)[0];
      if (!edge_marked[r]) {
        edge_marked[r] = 1;
        stack.push_back(r);
      }
    }
  }

  Triangulation::Parts parts;
  parts.vertices = mesh.vertices_;
  parts.vertex_parents = mesh.vertex_parents_;
  std::vector<Index> mid(static_cast<std::size_t>(mesh.n_edges()), invalid_index);
  for (Index i = 0; i < mesh.n_edges(); ++i) {
    if (!edge_marked[i]) continue;
    const auto& ed = mesh.edge(i);
    mid[i] = static_cast<Index>(parts.vertices.size());
    parts.vertices.push_back(midpoint(mesh.vertex(ed[0]), mesh.vertex(ed[1])));
    parts.vertex_parents.push_back(ed);
  }

  parts.elements.reserve(static_cast<std::size_t>(ne) * 2);
  parts.ancestry.reserve(static_cast<std::size_t>(ne) * 2);
  for (Index e = 0; e < ne; ++e) {
    const Element& el = mesh.element(e);
    const auto& ed = mesh.element_edges(e);
    const Ancestry& anc = mesh.ancestry(e);
    if (!edge_marked[ed[0]]) {
      parts.elements.push_back(el);
      parts.ancestry.push_back(anc);
      continue;
    }
    const auto halves = detail::bisect(el, mid[ed[0]]);
    // halves[0] has refinement edge (v2, v0) = local edge 2; halves[1] has (v1, v2) = local edge 1.
    const std::array<Index, 2> follow{ed[2], ed[1]};
    for (std::uint8_t s = 0; s < 2; ++s) {
      auto path = detail::extend(anc.path, s);
      if (edge_marked[follow[s]]) {
        const auto quarters = detail::bisect(halves[s], mid[follow[s]]);
        for (std::uint8_t t = 0; t < 2; ++t) {
          parts.elements.push_back(quarters[t]);
          parts.ancestry.push_back({anc.root, detail::extend(path, t)});
        }
      } else {
        parts.elements.push_back(halves[s]);
        parts.ancestry.push_back({anc.root, std::move(path)});
      }
    }
  }

  parts.boundary.reserve(mesh.boundary().size() + 16);
  std::unordered_map<std::uint64_t, Index> edge_of;
  edge_of.reserve(static_cast<std::size_t>(mesh.n_edges()));
  for (Index i = 0; i < mesh.n_edges(); ++i) edge_of.emplace(detail::edge_key(mesh.edge(i)[0], mesh.edge(i)[1]), i);
  for (const BoundaryFacet& f : mesh.boundary()) {
    const Index i = edge_of.at(detail::edge_key(f.v[0], f.v[1]));
    if (edge_marked[i]) {
      parts.boundary.push_back({{f.v[0], mid[i]}, f.tag});
      parts.boundary.push_back({{mid[i], f.v[1]}, f.tag});
    } else {
      parts.boundary.push_back(f);
    }
  }
  return Triangulation(std::move(parts), mesh.roots_);
}

inline Triangulation refine(const Triangulation& mesh, std::initializer_list<Index> marked) {
  return refine(mesh, std::span<const Index>(marked.begin(), marked.size()));
}

/// Marks every element.
inline Triangulation refine_uniform(const Triangulation& mesh) {
  std::vector<Index> all(static_cast<std::size_t>(mesh.n_elements()));
  for (Index e = 0; e < mesh.n_elements(); ++e) all[e] = e;
  return refine(mesh, all);
}

namespace detail {

inline std::unordered_set<std::string> interior_nodes(const Triangulation& mesh) {
  std::unordered_set<std::string> nodes;
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const Ancestry& a = mesh.ancestry(e);
    for (std::size_t len = 0; len < a.path.size(); ++len)
      nodes.insert(ancestry_key(a.root, std::span(a.path.data(), len)));
  }
  return nodes;
}

} // namespace detail

/// Coarsest common refinement of two meshes from the same initial mesh,
/// obtained as the union of their bisection trees.
inline Triangulation overlay(const Triangulation& a, const Triangulation& b) {
  if (!a.has_same_roots(b)) throw InputError("overlay: meshes descend from different initial meshes");
  const auto split_a = detail::interior_nodes(a);
  const auto split_b = detail::interior_nodes(b);
  const detail::RootMesh& root = *a.roots_;

  Triangulation::Parts parts;
  parts.vertices = root.vertices;
  parts.vertex_parents.assign(root.vertices.size(), {invalid_index, invalid_index});
  std::unordered_map<std::uint64_t, Index> mid;

  const auto midpoint_of = [&](Index p, Index q) {
    const auto [it, inserted] = mid.try_emplace(detail::edge_key(p, q), static_cast<Index>(parts.vertices.size()));
    if (inserted) {
      parts.vertices.push_back(midpoint(parts.vertices[p], parts.vertices[q]));
      parts.vertex_parents.push_back({std::min(p, q), std::max(p, q)});
    }
    return it->second;
  };

  std::vector<std::uint8_t> path;
  const std::function<void(Index, const Element&)> visit = [&](Index r, const Element& el) {
    const std::string key = detail::ancestry_key(r, path);
    if (split_a.contains(key) || split_b.contains(key)) {
      const auto children = detail::bisect(el, midpoint_of(el.v[0], el.v[1]));
      for (std::uint8_t s = 0; s < 2; ++s) {
        path.push_back(s);
        visit(r, children[s]);
        path.pop_back();
      }
    } else {
      parts.elements.push_back(el);
      parts.ancestry.push_back({r, path});
    }
  };
  for (Index r = 0; r < static_cast<Index>(root.elements.size()); ++r) visit(r, root.elements[r]);

  const std::function<void(Index, Index, BoundaryTag)> split_facet = [&](Index p, Index q, BoundaryTag tag) {
    const auto it = mid.find(detail::edge_key(p, q));
    if (it == mid.end()) {
      parts.boundary.push_back({{p, q}, tag});
      return;
    }
    split_facet(p, it->second, tag);
    split_facet(it->second, q, tag);
  };
  for (const BoundaryFacet& f : root.boundary) split_facet(f.v[0], f.v[1], f.tag);
  return Triangulation(std::move(parts), a.roots_);
}

/// True iff every element of `coarse` is a union of elements of `fine`.
inline bool is_refinement_of(const Triangulation& fine, const Triangulation& coarse) {
  if (!fine.has_same_roots(coarse)) return false;
  std::unordered_set<std::string> coarse_nodes;
  coarse_nodes.reserve(static_cast<std::size_t>(coarse.n_elements()));
  for (Index e = 0; e < coarse.n_elements(); ++e) {
    const Ancestry& a = coarse.ancestry(e);
    coarse_nodes.insert(detail::ancestry_key(a.root, a.path));
  }
  for (Index e = 0; e < fine.n_elements(); ++e) {
    const Ancestry& a = fine.ancestry(e);
    bool covered = false;
    for (std::size_t len = 0; len <= a.path.size() && !covered; ++len)
      covered = coarse_nodes.contains(detail::ancestry_key(a.root, std::span(a.path.data(), len)));
    if (!covered) return false;
  }
  return true;
}

namespace detail {

using TriangleKey = std::array<double, 6>;

inline TriangleKey triangle_key(const Triangulation& mesh, Index e) {
  auto c = mesh.corners(e);
  std::sort(c.begin(), c.end(), [](Point p, Point q) { return p.x < q.x || (p.x == q.x && p.y < q.y); });
  return {c[0].x, c[0].y, c[1].x, c[1].y, c[2].x, c[2].y};
}

struct TriangleKeyHash {
  std::size_t operator()(const TriangleKey& k) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (double d : k) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &d, sizeof bits);
      h = (h ^ bits) * 1099511628211ULL;
    }
    return h;
  }
};

} // namespace detail

/// Ids of the elements of `a` that are also elements of `b` (same vertex coordinates).
inline std::vector<Index> common_elements(const Triangulation& a, const Triangulation& b) {
  std::unordered_set<detail::TriangleKey, detail::TriangleKeyHash> in_b;
  in_b.reserve(static_cast<std::size_t>(b.n_elements()));
  for (Index e = 0; e < b.n_elements(); ++e) in_b.insert(detail::triangle_key(b, e));
  std::vector<Index> out;
  for (Index e = 0; e < a.n_elements(); ++e) {
    if (in_b.contains(detail::triangle_key(a, e))) out.push_back(e);
  }
  return out;
}

/// Smallest interior angle over all elements, in radians.
inline double min_angle(const Triangulation& mesh) {
  double best = std::numbers::pi;
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const auto c = mesh.corners(e);
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = c[(k + 1) % 3] - c[k];
      const Vec2 w = c[(k + 2) % 3] - c[k];
      best = std::min(best, std::atan2(std::abs(cross(u, w)), dot(u, w)));
    }
  }
  return best;
}

// Mesh text format:
//   vertices N elements M boundary K
//   N lines "x y", M lines "v0 v1 v2", K lines "v0 v1 tag" (tag D or N)
// Element vertex order is significant (vertex 2 newest, edge (0,1) refinement edge).

inline void write_mesh(std::ostream& os, const Triangulation& mesh) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << "vertices " << mesh.n_vertices() << " elements " << mesh.n_elements() << " boundary "
     << mesh.boundary().size() << '\n';
  os << std::setprecision(17);
  for (const Point& p : mesh.vertices()) os << p.x << ' ' << p.y << '\n';
  for (const Element& el : mesh.elements()) os << el.v[0] << ' ' << el.v[1] << ' ' << el.v[2] << '\n';
  for (const BoundaryFacet& f : mesh.boundary())
    os << f.v[0] << ' ' << f.v[1] << ' ' << static_cast<char>(f.tag) << '\n';
  os.flags(flags);
  os.precision(prec);
}

/// Reads a mesh as an initial triangulation (its elements become the forest roots).
inline Triangulation read_mesh(std::istream& is) {
  std::string w1, w2, w3;
  long long nv = -1, ne = -1, nb = -1;
  if (!(is >> w1 >> nv >> w2 >> ne >> w3 >> nb) || w1 != "vertices" || w2 != "elements" || w3 != "boundary" ||
      nv < 0 || ne < 0 || nb < 0)
    throw InputError("read_mesh: malformed header");
  std::vector<Point> vertices(static_cast<std::size_t>(nv));
  for (auto& p : vertices) {
    if (!(is >> p.x >> p.y)) throw InputError("read_mesh: malformed vertex line");
  }
  std::vector<Element> elements(static_cast<std::size_t>(ne));
  for (auto& el : elements) {
    if (!(is >> el.v[0] >> el.v[1] >> el.v[2])) throw InputError("read_mesh: malformed element line");
  }
  std::vector<BoundaryFacet> boundary(static_cast<std::size_t>(nb));
  for (auto& f : boundary) {
    std::string tag;
    if (!(is >> f.v[0] >> f.v[1] >> tag)) throw InputError("read_mesh: malformed boundary line");
    if (tag == "D")
      f.tag = BoundaryTag::dirichlet;
    else if (tag == "N")
      f.tag = BoundaryTag::neumann;
    else
      throw InputError("read_mesh: unknown boundary tag '" + tag + "'");
  }
  return Triangulation(std::move(vertices), std::move(elements), std::move(boundary));
}

} // namespace afem
