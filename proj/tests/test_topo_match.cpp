#include "twr/topo_match.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "twr/echo_sim.hpp"  // splitmix64

namespace {

using namespace twr;

double uniform01(std::uint64_t& state) { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; }

PointCloud random_cloud(int count, double lo, double hi, std::uint64_t seed) {
  PointCloud pc;
  std::uint64_t state = seed;
  for (int i = 0; i < count; ++i)
    pc.points.push_back({lo + (hi - lo) * uniform01(state), lo + (hi - lo) * uniform01(state)});
  return pc;
}

/// Brute force: test every edge's overlap rectangle against every point.
std::vector<EdgeId> oracle_edges(const PointCloud& pc, const MapperCover& cov) {
  std::vector<EdgeId> edges;
  for (int i = 0; i + 1 < cov.n_x; ++i)
    for (int j = 0; j < cov.n_y; ++j) {
      const double x_lo = cov.min_x + (i + 1) * cov.step_x - cov.s_x / 2.0;
      const double x_hi = cov.min_x + i * cov.step_x + cov.s_x / 2.0;
      const double y_lo = cov.min_y + j * cov.step_y - cov.s_y / 2.0;
      const double y_hi = cov.min_y + j * cov.step_y + cov.s_y / 2.0;
      for (const Point2& p : pc.points)
        if (p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi) {
          edges.push_back(make_edge_id(false, i, j));
          break;
        }
    }
  for (int i = 0; i < cov.n_x; ++i)
    for (int j = 0; j + 1 < cov.n_y; ++j) {
      const double x_lo = cov.min_x + i * cov.step_x - cov.s_x / 2.0;
      const double x_hi = cov.min_x + i * cov.step_x + cov.s_x / 2.0;
      const double y_lo = cov.min_y + (j + 1) * cov.step_y - cov.s_y / 2.0;
      const double y_hi = cov.min_y + j * cov.step_y + cov.s_y / 2.0;
      for (const Point2& p : pc.points)
        if (p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi) {
          edges.push_back(make_edge_id(true, i, j));
          break;
        }
    }
  std::sort(edges.begin(), edges.end());
  return edges;
}

TEST(ContourPointcloud, BinaryDiskRadiusStatistics) {
  const int n = 100;
  const double rho = 30.0;
  RealGrid phi(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      phi(r, c) = std::hypot(r - 50.0, c - 50.0) < rho ? 1.0 : -1.0;
  const PointCloud pc = contour_pointcloud(phi);
  ASSERT_GE(pc.points.size(), 8u);
  double mean_radius = 0.0;
  for (const Point2& p : pc.points) {
    const double d = std::hypot(p.y - 50.0, p.x - 50.0);
    EXPECT_NEAR(d, rho, 1.0);
    mean_radius += d;
  }
  mean_radius /= pc.points.size();
  EXPECT_NEAR(mean_radius, rho, 0.02 * rho);
}

TEST(ContourPointcloud, NoSignChangeThrows) {
  const RealGrid phi(10, 10, 1.0);
  EXPECT_THROW(contour_pointcloud(phi), std::runtime_error);
  const RealGrid neg(10, 10, -2.0);
  EXPECT_THROW(contour_pointcloud(neg), std::runtime_error);
}

TEST(ContourPointcloud, LinearFieldInterpolatesExactly) {
  RealGrid phi(10, 10);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) phi(r, c) = c - 5.5;
  const PointCloud pc = contour_pointcloud(phi);
  ASSERT_FALSE(pc.points.empty());
  for (const Point2& p : pc.points) {
    EXPECT_GT(p.x, 5.0);
    EXPECT_LT(p.x, 6.0);
    EXPECT_DOUBLE_EQ(p.x, 5.5);
  }
}

TEST(BuildCover, UnitSquareArithmetic) {
  PointCloud a, b;
  a.points = {{0.0, 0.0}, {1.0, 1.0}};
  b.points = {{0.5, 0.5}};
  const MapperCover cov = build_cover(a, b, 100, 100, 1.5);
  EXPECT_DOUBLE_EQ(cov.step_x, 1.0 / 99.0);
  EXPECT_DOUBLE_EQ(cov.step_y, 1.0 / 99.0);
  EXPECT_DOUBLE_EQ(cov.s_x, 1.5 / 99.0);
  EXPECT_DOUBLE_EQ(cov.s_y, 1.5 / 99.0);
}

TEST(BuildCover, JointBoundsAbsorbSubset) {
  const PointCloud big = random_cloud(50, -3.0, 7.0, 1);
  PointCloud small;
  small.points = {{0.0, 0.5}, {1.0, 2.0}};
  const MapperCover cov = build_cover(small, big, 10, 10, 1.5);
  double min_x = big.points[0].x, max_x = big.points[0].x;
  double min_y = big.points[0].y, max_y = big.points[0].y;
  for (const Point2& p : big.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  EXPECT_DOUBLE_EQ(cov.min_x, min_x);
  EXPECT_DOUBLE_EQ(cov.max_x, max_x);
  EXPECT_DOUBLE_EQ(cov.min_y, min_y);
  EXPECT_DOUBLE_EQ(cov.max_y, max_y);
}

TEST(BuildCover, EveryPointFallsInSomeCell) {
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud a = random_cloud(40, -1.0, 4.0, 100 + trial);
    const PointCloud b = random_cloud(30, 0.0, 6.0, 200 + trial);
    const MapperCover cov = build_cover(a, b, 8, 7, 1.4);
    for (const PointCloud* pc : {&a, &b})
      for (const Point2& p : pc->points) {
        bool covered = false;
        for (int i = 0; i < cov.n_x && !covered; ++i)
          for (int j = 0; j < cov.n_y && !covered; ++j) {
            const double cx = cov.min_x + i * cov.step_x;
            const double cy = cov.min_y + j * cov.step_y;
            covered = p.x >= cx - cov.s_x / 2 && p.x <= cx + cov.s_x / 2 && p.y >= cy - cov.s_y / 2 &&
                      p.y <= cy + cov.s_y / 2;
          }
        ASSERT_TRUE(covered);
      }
  }
}

TEST(BuildCover, DegenerateAxisWidened) {
  PointCloud a, b;
  a.points = {{2.0, 1.0}};
  b.points = {{2.0, 3.0}};  // x axis degenerate
  const MapperCover cov = build_cover(a, b, 4, 4, 1.5);
  EXPECT_DOUBLE_EQ(cov.min_x, 1.5);
  EXPECT_DOUBLE_EQ(cov.max_x, 2.5);
  EXPECT_GT(cov.step_x, 0.0);
}

TEST(BuildCover, RejectsBadParameters) {
  const PointCloud a = random_cloud(5, 0, 1, 3);
  EXPECT_THROW(build_cover(a, a, 1, 4, 1.5), std::invalid_argument);
  EXPECT_THROW(build_cover(a, a, 4, 4, 1.0), std::invalid_argument);
  EXPECT_THROW(build_cover(a, PointCloud{}, 4, 4, 1.5), std::invalid_argument);
}

TEST(EdgeSet, MatchesBruteForceOnRandomClouds) {
  std::uint64_t state = 77;
  for (int trial = 0; trial < 30; ++trial) {
    const int nx = 3 + static_cast<int>(uniform01(state) * 6);
    const int ny = 3 + static_cast<int>(uniform01(state) * 6);
    const double of = 1.1 + uniform01(state);
    const PointCloud a = random_cloud(25, 0.0, 10.0, 300 + trial);
    const PointCloud b = random_cloud(25, 2.0, 13.0, 400 + trial);
    const MapperCover cov = build_cover(a, b, nx, ny, of);
    for (const PointCloud* pc : {&a, &b}) {
      const EdgeSet fast = edge_set(*pc, cov);
      const std::vector<EdgeId> slow = oracle_edges(*pc, cov);
      ASSERT_EQ(fast.edges, slow) << "trial " << trial;
    }
  }
}

TEST(EdgeSet, DenseCloudYieldsAllEdges) {
  PointCloud dense;
  for (int i = 0; i <= 60; ++i)
    for (int j = 0; j <= 60; ++j) dense.points.push_back({i / 60.0, j / 60.0});
  const MapperCover cov = build_cover(dense, dense, 6, 5, 1.5);
  const EdgeSet edges = edge_set(dense, cov);
  EXPECT_EQ(edges.edges.size(), static_cast<size_t>((6 - 1) * 5 + 6 * (5 - 1)));
}

TEST(EdgeSet, BoundaryPointIncluded) {
  // dyadic geometry: bounds [0,1], n=5 -> step=0.25, of=1.5 -> s=0.375
  PointCloud span;
  span.points = {{0.0, 0.0}, {1.0, 1.0}};
  const MapperCover cov = build_cover(span, span, 5, 5, 1.5);
  ASSERT_DOUBLE_EQ(cov.step_x, 0.25);
  // horizontal overlap of (0,0)->(1,0): x in [0.0625, 0.1875]
  PointCloud on_edge;
  on_edge.points = {{0.1875, 0.0}};
  const EdgeSet edges = edge_set(on_edge, cov);
  EXPECT_TRUE(std::find(edges.edges.begin(), edges.edges.end(), make_edge_id(false, 0, 0)) != edges.edges.end());
}

TEST(Jaccard, HandCases) {
  MapperCover cov;
  cov.n_x = cov.n_y = 4;
  EdgeSet e1{cov, {make_edge_id(false, 0, 0), make_edge_id(false, 1, 0), make_edge_id(true, 0, 0)}};
  EdgeSet e2{cov, {make_edge_id(false, 1, 0), make_edge_id(true, 0, 0), make_edge_id(true, 1, 1)}};
  EXPECT_DOUBLE_EQ(jaccard_similarity(e1, e1), 1.0);
  EXPECT_DOUBLE_EQ(jaccard_similarity(e1, e2), 0.5);  // 2 shared, 4 total
  EdgeSet disjoint{cov, {make_edge_id(true, 2, 2)}};
  EXPECT_DOUBLE_EQ(jaccard_similarity(e1, disjoint), 0.0);
  EdgeSet empty1{cov, {}}, empty2{cov, {}};
  EXPECT_DOUBLE_EQ(jaccard_similarity(empty1, empty2), 1.0);
  EXPECT_DOUBLE_EQ(jaccard_similarity(e1, empty1), 0.0);
}

TEST(Jaccard, CoverMismatchThrows) {
  MapperCover a, b;
  a.n_x = a.n_y = 4;
  b = a;
  b.min_x = 1.0;
  EdgeSet e1{a, {}}, e2{b, {}};
  EXPECT_THROW(jaccard_similarity(e1, e2), std::invalid_argument);
}

TEST(Similarity, SymmetricAndSelfUnit) {
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud a = random_cloud(30, 0.0, 8.0, 500 + trial);
    const PointCloud b = random_cloud(20, 1.0, 12.0, 600 + trial);
    const MapperCover cov_ab = build_cover(a, b, 7, 7, 1.5);
    const MapperCover cov_ba = build_cover(b, a, 7, 7, 1.5);
    const double sim_ab = jaccard_similarity(edge_set(a, cov_ab), edge_set(b, cov_ab));
    const double sim_ba = jaccard_similarity(edge_set(b, cov_ba), edge_set(a, cov_ba));
    EXPECT_DOUBLE_EQ(sim_ab, sim_ba);
    EXPECT_GE(sim_ab, 0.0);
    EXPECT_LE(sim_ab, 1.0);

    const MapperCover cov_aa = build_cover(a, a, 7, 7, 1.5);
    const EdgeSet self = edge_set(a, cov_aa);
    if (!self.edges.empty()) EXPECT_DOUBLE_EQ(jaccard_similarity(self, self), 1.0);
  }
}

TemplateLibrary tiny_library() {
  TemplateLibrary lib;
  lib.map_type = "rtm";
  lib.cover_nx = lib.cover_ny = 8;
  lib.cover_overlap = 1.5;
  lib.class_names = {"a", "b", "c"};
  lib.templates.resize(3);
  // class blobs at distinct locations
  for (int cls = 0; cls < 3; ++cls) {
    const double base = 20.0 * cls;
    for (int t = 0; t < 2; ++t) {
      PointCloud pc;
      for (int i = 0; i < 12; ++i)
        pc.points.push_back({base + 0.3 * i + 0.05 * t, base + 0.2 * i});
      lib.templates[cls].push_back(pc);
    }
  }
  return lib;
}

TEST(Classify, MatchesOwnTemplateClass) {
  const TemplateLibrary lib = tiny_library();
  const ClassificationResult res = classify(lib.templates[2][0], lib);
  EXPECT_EQ(res.label, 3);
  EXPECT_DOUBLE_EQ(res.score_table[2][0], 1.0);  // self-similarity
  EXPECT_EQ(res.class_sums.size(), 3u);
  EXPECT_EQ(res.score_table[0].size(), 2u);
}

TEST(Classify, SingleClassAlwaysWins) {
  TemplateLibrary lib = tiny_library();
  lib.templates.resize(1);
  lib.class_names.resize(1);
  const PointCloud probe = random_cloud(15, 100.0, 110.0, 9);
  const ClassificationResult res = classify(probe, lib);
  EXPECT_EQ(res.label, 1);
}

TEST(Classify, TieBreaksToSmallestIndex) {
  TemplateLibrary lib;
  lib.map_type = "rtm";
  lib.cover_nx = lib.cover_ny = 6;
  lib.cover_overlap = 1.5;
  lib.class_names = {"a", "b"};
  PointCloud shared;
  shared.points = {{0.0, 0.0}, {5.0, 5.0}, {2.5, 2.5}};
  lib.templates = {{shared}, {shared}};  // identical classes: equal sums
  const ClassificationResult res = classify(shared, lib);
  EXPECT_EQ(res.label, 1);
  EXPECT_DOUBLE_EQ(res.class_sums[0], res.class_sums[1]);
}

TEST(Classify, DeterministicAcrossCalls) {
  const TemplateLibrary lib = tiny_library();
  const PointCloud probe = random_cloud(25, 15.0, 30.0, 12);
  const ClassificationResult a = classify(probe, lib);
  const ClassificationResult b = classify(probe, lib);
  EXPECT_EQ(a.label, b.label);
  EXPECT_EQ(a.class_sums, b.class_sums);
}

TEST(Classify, RejectsEmptyLibrary) {
  TemplateLibrary lib;
  const PointCloud probe = random_cloud(5, 0, 1, 2);
  EXPECT_THROW(classify(probe, lib), std::invalid_argument);
}

}  // namespace
