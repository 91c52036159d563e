#include "test_support.hpp"

#include <afem/mesh.hpp>
#include <afem/zshape.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

using namespace afem;
using afem::testing::criss_cross_square;
using afem::testing::is_conforming;
using afem::testing::unit_square;

TEST(ElementSize, SquareRootOfArea) {
  const Triangulation legs = make_initial_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
                                               {{{0, 1}, BoundaryTag::dirichlet},
                                                {{1, 2}, BoundaryTag::dirichlet},
                                                {{2, 0}, BoundaryTag::dirichlet}});
  EXPECT_NEAR(element_size(legs, 0), std::sqrt(0.5), 1e-15);
  const Triangulation unit = make_initial_mesh({{0, 0}, {2, 0}, {0, 1}}, {{0, 1, 2}},
                                               {{{0, 1}, BoundaryTag::dirichlet},
                                                {{1, 2}, BoundaryTag::dirichlet},
                                                {{2, 0}, BoundaryTag::dirichlet}});
  EXPECT_DOUBLE_EQ(element_size(unit, 0), 1.0);
  const Triangulation big = make_initial_mesh({{0, 0}, {2, 0}, {0, 2}}, {{0, 1, 2}},
                                              {{{0, 1}, BoundaryTag::dirichlet},
                                               {{1, 2}, BoundaryTag::dirichlet},
                                               {{2, 0}, BoundaryTag::dirichlet}});
  EXPECT_NEAR(element_size(big, 0), std::sqrt(2.0), 1e-15);
}

TEST(InitialMesh, LongestEdgeIsRefinementEdge) {
  const Triangulation t = unit_square();
  for (Index e = 0; e < t.n_elements(); ++e) {
    const auto& v = t.element(e).v;
    // the diagonal 0-2 is the refinement edge of both triangles
    EXPECT_TRUE((v[0] == 0 && v[1] == 2) || (v[0] == 2 && v[1] == 0));
    EXPECT_GT(t.area(e), 0.0);
  }
}

TEST(InitialMesh, RejectsBadInput) {
  EXPECT_THROW(make_initial_mesh({{0, 0}, {1, 0}}, {{0, 1, 2}}, {}), InputError);
  EXPECT_THROW(make_initial_mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, {}), InputError);
  // boundary edge without a facet
  EXPECT_THROW(make_initial_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{{0, 1}, BoundaryTag::dirichlet}}),
               InputError);
}

TEST(Refine, EmptyMarkingKeepsMesh) {
  const Triangulation t = unit_square();
  const Triangulation r = refine(t, std::span<const Index>{});
  EXPECT_EQ(r.n_elements(), t.n_elements());
  EXPECT_EQ(common_elements(t, r).size(), 2u);
}

TEST(Refine, ClosureBisectsNeighbourAcrossSharedRefinementEdge) {
  const Triangulation t = unit_square();
  const Triangulation r = refine(t, {0});
  EXPECT_EQ(r.n_elements(), 4);
  EXPECT_EQ(r.n_vertices(), 5);
  EXPECT_TRUE(is_conforming(r, 1.0));
  EXPECT_TRUE(common_elements(t, r).empty());
}

TEST(Refine, MarkAllTwiceRespectsSplittingBound) {
  const Triangulation t = unit_square();
  const Triangulation r1 = refine(t, {0, 1});
  EXPECT_EQ(r1.n_elements(), 4);
  const Triangulation r2 = refine_uniform(r1);
  EXPECT_LE(r2.n_elements(), 4 * 4);
  EXPECT_EQ(r2.n_elements(), 8);
  EXPECT_TRUE(is_conforming(r2, 1.0));
  for (Index e = 0; e < r2.n_elements(); ++e) EXPECT_EQ(r2.generation(e), 2u);
}

TEST(Refine, InvalidIdThrows) {
  const Triangulation t = unit_square();
  EXPECT_THROW(refine(t, {5}), InputError);
  EXPECT_THROW(refine(t, {-1}), InputError);
}

TEST(Refine, BoundaryTagsAreInherited) {
  const Triangulation t = unit_square(BoundaryTag::neumann, BoundaryTag::dirichlet);
  const Triangulation r = refine_uniform(refine_uniform(t));
  double neumann_length = 0.0;
  for (const auto& f : r.boundary()) {
    const double len = norm(r.vertex(f.v[1]) - r.vertex(f.v[0]));
    if (f.tag == BoundaryTag::neumann) {
      neumann_length += len;
      EXPECT_EQ(r.vertex(f.v[0]).y, 0.0);
      EXPECT_EQ(r.vertex(f.v[1]).y, 0.0);
    }
  }
  EXPECT_DOUBLE_EQ(neumann_length, 1.0);
}

// Splitting property #(T\T') + #T <= #T' <= 4 #(T\T') + #(T ∩ T') and conformity
// over random refinement histories on several initial meshes.
TEST(Refine, RandomHistoriesSatisfySplittingAndConformity) {
  std::mt19937 rng(7);
  const std::vector<std::pair<Triangulation, double>> roots{
      {unit_square(), 1.0}, {criss_cross_square(), 1.0}, {build_zshape(), 3.5}};
  int calls = 0;
  for (const auto& [t0, area] : roots) {
    const double angle0 = min_angle(t0);
    Triangulation t = t0;
    for (int step = 0; step < 12; ++step) {
      const double fraction = std::uniform_real_distribution<double>(0.02, 0.5)(rng);
      const auto marked = afem::testing::random_subset(t.n_elements(), fraction, rng);
      const Triangulation r = refine(t, marked);
      ++calls;
      const auto kept = static_cast<Index>(common_elements(t, r).size());
      const Index removed = t.n_elements() - kept;
      EXPECT_LE(removed + t.n_elements(), r.n_elements());
      EXPECT_LE(r.n_elements(), 4 * removed + kept);
      EXPECT_TRUE(is_refinement_of(r, t));
      if (r.n_vertices() < 1500) EXPECT_TRUE(is_conforming(r, area));
      EXPECT_GE(min_angle(r), angle0 / 2.0 - 1e-12);
      t = r;
    }
  }
  EXPECT_EQ(calls, 36);
}

TEST(Refine, MarkedElementsDisappear) {
  std::mt19937 rng(3);
  Triangulation t = build_zshape();
  for (int step = 0; step < 6; ++step) {
    const auto marked = afem::testing::random_subset(t.n_elements(), 0.2, rng);
    const Triangulation r = refine(t, marked);
    const auto kept = common_elements(t, r);
    for (Index m : marked) EXPECT_FALSE(std::binary_search(kept.begin(), kept.end(), m));
    t = r;
  }
}

TEST(Overlay, IdempotentAndCoarsestIsNeutral) {
  std::mt19937 rng(11);
  const Triangulation t0 = build_zshape();
  const Triangulation t = afem::testing::random_refinement(t0, 4, 0.3, rng);
  const Triangulation tt = overlay(t, t);
  EXPECT_EQ(tt.n_elements(), t.n_elements());
  EXPECT_EQ(common_elements(tt, t).size(), static_cast<std::size_t>(t.n_elements()));
  const Triangulation t0t = overlay(t0, t);
  EXPECT_EQ(common_elements(t0t, t).size(), static_cast<std::size_t>(t.n_elements()));
  EXPECT_EQ(t0t.n_elements(), t.n_elements());
}

TEST(Overlay, DisjointSupportsAttainEquality) {
  const Triangulation t0 = criss_cross_square();
  // the elements with x < 1/2 and x > 1/2 have boundary refinement edges: no closure
  Index left = invalid_index, right = invalid_index;
  for (Index e = 0; e < t0.n_elements(); ++e) {
    const auto c = t0.corners(e);
    const double cx = (c[0].x + c[1].x + c[2].x) / 3.0;
    const double cy = (c[0].y + c[1].y + c[2].y) / 3.0;
    if (cx < 0.3 && std::abs(cy - 0.5) < 1e-12) left = e;
    if (cx > 0.7 && std::abs(cy - 0.5) < 1e-12) right = e;
  }
  ASSERT_NE(left, invalid_index);
  ASSERT_NE(right, invalid_index);
  const Triangulation a = refine(t0, {left});
  const Triangulation b = refine(t0, {right});
  const Triangulation ab = overlay(a, b);
  EXPECT_EQ(ab.n_elements(), a.n_elements() + b.n_elements() - t0.n_elements());
  EXPECT_TRUE(is_refinement_of(ab, a));
  EXPECT_TRUE(is_refinement_of(ab, b));
  EXPECT_TRUE(is_conforming(ab, 1.0));
  // a ⊕ b coincides with refining both elements at once
  EXPECT_EQ(common_elements(overlay(a, b), refine(t0, {left, right})).size(),
            static_cast<std::size_t>(ab.n_elements()));
}

TEST(Overlay, RandomPairsSatisfyCountBound) {
  std::mt19937 rng(5);
  const Triangulation t0 = build_zshape();
  for (int trial = 0; trial < 10; ++trial) {
    const Triangulation a = afem::testing::random_refinement(t0, 3 + trial % 3, 0.25, rng);
    const Triangulation b = afem::testing::random_refinement(t0, 3 + (trial + 1) % 3, 0.25, rng);
    const Triangulation ab = overlay(a, b);
    EXPECT_LE(ab.n_elements(), a.n_elements() + b.n_elements() - t0.n_elements());
    EXPECT_TRUE(is_refinement_of(ab, a));
    EXPECT_TRUE(is_refinement_of(ab, b));
    if (ab.n_vertices() < 1500) EXPECT_TRUE(is_conforming(ab, 3.5));
  }
}

TEST(Overlay, DifferentRootsThrow) {
  EXPECT_THROW(overlay(unit_square(), criss_cross_square()), InputError);
  // equal initial data describes the same forest
  EXPECT_EQ(overlay(unit_square(), unit_square()).n_elements(), unit_square().n_elements());
}

TEST(IsRefinementOf, Basics) {
  const Triangulation t = unit_square();
  EXPECT_TRUE(is_refinement_of(t, t));
  const Triangulation r = refine(t, {0});
  EXPECT_TRUE(is_refinement_of(r, t));
  EXPECT_FALSE(is_refinement_of(t, r));
  EXPECT_TRUE(is_refinement_of(r, unit_square()));
  EXPECT_FALSE(is_refinement_of(criss_cross_square(), t));
  EXPECT_FALSE(is_refinement_of(t, criss_cross_square()));
}

TEST(CommonElements, Basics) {
  const Triangulation t = build_zshape();
  EXPECT_EQ(common_elements(t, t).size(), 14u);
  // an element whose refinement edge lies on the boundary is bisected without closure
  Index lone = invalid_index;
  for (Index e = 0; e < t.n_elements() && lone == invalid_index; ++e) {
    if (t.edge_elements(t.element_edges(e)[0])[1] == invalid_index) lone = e;
  }
  ASSERT_NE(lone, invalid_index);
  const Triangulation r = refine(t, {lone});
  const auto kept = common_elements(t, r);
  EXPECT_EQ(kept.size(), 13u);
  EXPECT_FALSE(std::binary_search(kept.begin(), kept.end(), lone));
}

TEST(MeshIo, RoundTripIsLossless) {
  std::mt19937 rng(2);
  const Triangulation t = afem::testing::random_refinement(build_zshape(), 5, 0.3, rng);
  std::stringstream ss;
  write_mesh(ss, t);
  const Triangulation back = read_mesh(ss);
  ASSERT_EQ(back.n_vertices(), t.n_vertices());
  ASSERT_EQ(back.n_elements(), t.n_elements());
  ASSERT_EQ(back.boundary().size(), t.boundary().size());
  for (Index i = 0; i < t.n_vertices(); ++i) EXPECT_EQ(back.vertex(i), t.vertex(i));
  for (Index e = 0; e < t.n_elements(); ++e) EXPECT_EQ(back.element(e).v, t.element(e).v);
  for (std::size_t k = 0; k < t.boundary().size(); ++k) EXPECT_EQ(back.boundary()[k].tag, t.boundary()[k].tag);
}

TEST(MeshIo, MalformedInputThrows) {
  std::stringstream bad_header("vertexes 3 elements 1 boundary 3\n");
  EXPECT_THROW(read_mesh(bad_header), InputError);
  std::stringstream bad_tag("vertices 3 elements 1 boundary 3\n0 0\n1 0\n0 1\n0 1 2\n0 1 D\n1 2 D\n2 0 X\n");
  EXPECT_THROW(read_mesh(bad_tag), InputError);
  std::stringstream truncated("vertices 3 elements 1 boundary 3\n0 0\n1 0\n");
  EXPECT_THROW(read_mesh(truncated), InputError);
}

TEST(ZShapeMesh, Geometry) {
  const Triangulation t = build_zshape();
  EXPECT_EQ(t.n_elements(), 14);
  EXPECT_NEAR(t.total_area(), 3.5, 1e-15);
  EXPECT_TRUE(is_conforming(t, 3.5));
  // interior angle at the origin: sum of element angles at vertex (0,0)
  double angle = 0.0;
  for (Index e = 0; e < t.n_elements(); ++e) {
    const auto c = t.corners(e);
    for (int k = 0; k < 3; ++k) {
      if (c[k] == Point{0, 0}) {
        const Vec2 u = c[(k + 1) % 3] - c[k];
        const Vec2 w = c[(k + 2) % 3] - c[k];
        angle += std::atan2(std::abs(cross(u, w)), dot(u, w));
      }
    }
  }
  EXPECT_NEAR(angle, 7.0 * std::numbers::pi / 4.0, 1e-13);
}
