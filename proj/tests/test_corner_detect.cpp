#include "twr/corner_detect.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "twr/echo_sim.hpp"  // splitmix64

namespace {

using namespace twr;

double uniform01(std::uint64_t& state) { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------
// Brute-force corner oracle: direct 2-D convolution for the blur, explicit
// 26-neighbor scan over the DoG stack, same pruning rules.
// ---------------------------------------------------------------------------

RealGrid oracle_blur(const RealGrid& src, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  const int k = 2 * radius + 1;
  std::vector<double> kernel(static_cast<size_t>(k) * k);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i)
    for (int j = -radius; j <= radius; ++j) {
      const double v = std::exp(-0.5 * (i * i + j * j) / (sigma * sigma));
      kernel[(i + radius) * k + (j + radius)] = v;
      sum += v;
    }
  for (double& v : kernel) v /= sum;

  auto mirror = [](int i, int n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return std::clamp(i, 0, n - 1);
  };
  RealGrid out(src.rows(), src.cols());
  for (int r = 0; r < src.rows(); ++r)
    for (int c = 0; c < src.cols(); ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        for (int j = -radius; j <= radius; ++j)
          acc += kernel[(i + radius) * k + (j + radius)] * src(mirror(r + i, src.rows()), mirror(c + j, src.cols()));
      out(r, c) = acc;
    }
  return out;
}

std::vector<Corner> oracle_corners(const BinaryMap& binary, const SiftConfig& cfg) {
  RealGrid base(binary.pixels.rows(), binary.pixels.cols());
  for (size_t i = 0; i < base.size(); ++i) base[i] = binary.pixels[i];
  base = normalize_unit(base);

  const double k = std::pow(2.0, 1.0 / cfg.levels_per_octave);
  const double edge_limit =
      (cfg.hessian_edge_ratio_max + 1.0) * (cfg.hessian_edge_ratio_max + 1.0) / cfg.hessian_edge_ratio_max;
  std::vector<Corner> found;

  RealGrid oct_base = base;
  for (int oct = 0; oct < cfg.octave_count; ++oct) {
    if (oct_base.rows() < 8 || oct_base.cols() < 8) break;
    std::vector<RealGrid> gauss;
    for (int s = 0; s < cfg.levels_per_octave + 3; ++s)
      gauss.push_back(oracle_blur(oct_base, cfg.base_sigma * std::pow(k, s)));
    std::vector<RealGrid> dog;
    for (size_t s = 0; s + 1 < gauss.size(); ++s) {
      RealGrid d(oct_base.rows(), oct_base.cols());
      for (size_t i = 0; i < d.size(); ++i) d[i] = gauss[s + 1][i] - gauss[s][i];
      dog.push_back(std::move(d));
    }
    for (int s = 1; s + 1 < static_cast<int>(dog.size()); ++s)
      for (int r = 1; r + 1 < oct_base.rows(); ++r)
        for (int c = 1; c + 1 < oct_base.cols(); ++c) {
          const double v = dog[s](r, c);
          if (std::abs(v) < cfg.contrast_threshold) continue;
          int greater = 0, smaller = 0;
          for (int ds = -1; ds <= 1; ++ds)
            for (int dr = -1; dr <= 1; ++dr)
              for (int dc = -1; dc <= 1; ++dc) {
                if (ds == 0 && dr == 0 && dc == 0) continue;
                const double u = dog[s + ds](r + dr, c + dc);
                if (v > u) ++greater;
                if (v < u) ++smaller;
              }
          if (greater != 26 && smaller != 26) continue;
          const RealGrid& d = dog[s];
          const double dnn = d(r + 1, c) + d(r - 1, c) - 2.0 * v;
          const double dmm = d(r, c + 1) + d(r, c - 1) - 2.0 * v;
          const double dnm = (d(r + 1, c + 1) - d(r + 1, c - 1) - d(r - 1, c + 1) + d(r - 1, c - 1)) / 4.0;
          const double tr = dnn + dmm;
          const double det = dnn * dmm - dnm * dnm;
          if (det <= 0.0 || tr * tr / det > edge_limit) continue;
          found.push_back({r * (1 << oct), c * (1 << oct), std::abs(v)});
        }
    RealGrid down((oct_base.rows() + 1) / 2, (oct_base.cols() + 1) / 2);
    for (int r = 0; r < down.rows(); ++r)
      for (int c = 0; c < down.cols(); ++c) down(r, c) = gauss[cfg.levels_per_octave](2 * r, 2 * c);
    oct_base = down;
  }
  std::stable_sort(found.begin(), found.end(), [](const Corner& a, const Corner& b) { return a.response > b.response; });
  if (static_cast<int>(found.size()) > cfg.max_corners) found.resize(cfg.max_corners);
  return found;
}

BinaryMap blob_scene(int rows, int cols, const std::vector<std::pair<int, int>>& centers) {
  BinaryMap binary;
  binary.pixels = MaskGrid(rows, cols);
  for (auto [r, c] : centers)
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) binary.pixels(r + dr, c + dc) = 1;
  return binary;
}

TEST(ThresholdTruncate, SmallHandCase) {
  RealGrid g(2, 2);
  g(0, 0) = 1;
  g(0, 1) = 5;
  g(1, 0) = 2;
  g(1, 1) = 10;
  const BinaryMap b = threshold_truncate(g, 0.3);
  EXPECT_DOUBLE_EQ(b.threshold_used, 3.0);
  EXPECT_EQ(b.pixels(0, 0), 0);
  EXPECT_EQ(b.pixels(0, 1), 1);
  EXPECT_EQ(b.pixels(1, 0), 0);
  EXPECT_EQ(b.pixels(1, 1), 1);
}

TEST(ThresholdTruncate, ConstantMapAllOnes) {
  const RealGrid g(4, 4, 2.0);
  const BinaryMap b = threshold_truncate(g, 0.5);
  for (const auto v : b.pixels.raw()) EXPECT_EQ(v, 1);
}

TEST(ThresholdTruncate, MatchesPerPixelOracle) {
  RealGrid g(16, 16);
  std::uint64_t state = 31;
  for (double& v : g.raw()) v = uniform01(state);
  const double threshold = 0.3 * max_value(g);
  const BinaryMap b = threshold_truncate(g, 0.3);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) EXPECT_EQ(b.pixels(r, c), g(r, c) >= threshold ? 1 : 0);
}

TEST(ThresholdTruncate, EmptySceneThrows) {
  const RealGrid g(8, 8, 0.0);
  EXPECT_THROW(threshold_truncate(g, 0.3), std::runtime_error);
  EXPECT_THROW(threshold_truncate(g, 0.0), std::invalid_argument);
  EXPECT_THROW(threshold_truncate(g, 1.0), std::invalid_argument);
}

TEST(DetectCorners, BlankImageHasNoCorners) {
  BinaryMap binary;
  binary.pixels = MaskGrid(32, 32, 1);  // constant: no extrema anywhere
  EXPECT_THROW(detect_corners(binary, SiftConfig{}), std::runtime_error);
}

TEST(DetectCorners, SingleBlobFoundAtCenter) {
  // a 3x3 blob has characteristic scale ~1, below the pipeline default sigma
  SiftConfig cfg;
  cfg.base_sigma = 0.9;
  const BinaryMap binary = blob_scene(64, 64, {{21, 21}});
  const CornerSet corners = detect_corners(binary, cfg);
  ASSERT_EQ(corners.points.size(), 1u);
  EXPECT_LE(std::abs(corners.points[0].n - 21), 1);
  EXPECT_LE(std::abs(corners.points[0].m - 21), 1);

  const auto expected = oracle_corners(binary, cfg);
  ASSERT_EQ(expected.size(), corners.points.size());
  EXPECT_EQ(expected[0].n, corners.points[0].n);
  EXPECT_EQ(expected[0].m, corners.points[0].m);
  EXPECT_NEAR(expected[0].response, corners.points[0].response, 1e-9);
}

TEST(DetectCorners, TwoBlobsGiveTwoCorners) {
  SiftConfig cfg;
  cfg.base_sigma = 0.9;
  const BinaryMap binary = blob_scene(64, 64, {{16, 14}, {44, 48}});
  const CornerSet corners = detect_corners(binary, cfg);
  ASSERT_EQ(corners.points.size(), 2u);
  std::vector<std::pair<int, int>> got;
  for (const Corner& c : corners.points) got.push_back({c.n, c.m});
  std::sort(got.begin(), got.end());
  EXPECT_LE(std::abs(got[0].first - 16), 1);
  EXPECT_LE(std::abs(got[0].second - 14), 1);
  EXPECT_LE(std::abs(got[1].first - 44), 1);
  EXPECT_LE(std::abs(got[1].second - 48), 1);
}

TEST(DetectCorners, MatchesOracleOnRandomScenes) {
  std::uint64_t state = 4242;
  for (int trial = 0; trial < 5; ++trial) {
    RealGrid g(48, 48);
    for (double& v : g.raw()) v = uniform01(state);
    // sparse bright blobs over weak noise
    for (int blob = 0; blob < 6; ++blob) {
      const int r = 4 + static_cast<int>(uniform01(state) * 40);
      const int c = 4 + static_cast<int>(uniform01(state) * 40);
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) g(r + dr, c + dc) += 6.0;
    }
    const BinaryMap binary = threshold_truncate(g, 0.5);

    SiftConfig cfg;
    std::vector<Corner> expected;
    try {
      expected = oracle_corners(binary, cfg);
    } catch (const std::runtime_error&) {
      expected.clear();
    }
    if (expected.empty()) {
      EXPECT_THROW(detect_corners(binary, cfg), std::runtime_error);
      continue;
    }
    const CornerSet got = detect_corners(binary, cfg);
    ASSERT_EQ(got.points.size(), expected.size());
    for (size_t i = 0; i < expected.size(); ++i) {
      EXPECT_EQ(got.points[i].n, expected[i].n);
      EXPECT_EQ(got.points[i].m, expected[i].m);
      EXPECT_NEAR(got.points[i].response, expected[i].response, 1e-9);
    }
  }
}

TEST(DetectCorners, InvariantToPositiveScaling) {
  SiftConfig cfg;
  cfg.base_sigma = 0.9;
  const BinaryMap ones = blob_scene(48, 48, {{12, 12}, {30, 34}});
  BinaryMap scaled = ones;
  for (auto& v : scaled.pixels.raw()) v = static_cast<std::uint8_t>(v * 7);
  const CornerSet a = detect_corners(ones, cfg);
  const CornerSet b = detect_corners(scaled, cfg);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].n, b.points[i].n);
    EXPECT_EQ(a.points[i].m, b.points[i].m);
    EXPECT_NEAR(a.points[i].response, b.points[i].response, 1e-12);
  }
}

TEST(DetectCorners, CapsAtMaxCorners) {
  RealGrid g(64, 64);
  std::uint64_t state = 9;
  for (double& v : g.raw()) v = uniform01(state);
  const BinaryMap binary = threshold_truncate(g, 0.5);
  SiftConfig cfg;
  try {
    const CornerSet corners = detect_corners(binary, cfg);
    EXPECT_LE(static_cast<int>(corners.points.size()), cfg.max_corners);
    EXPECT_GE(static_cast<int>(corners.points.size()), 1);
  } catch (const std::runtime_error&) {
    // dense noise can legitimately prune to nothing
  }
}

TEST(DetectCorners, RejectsTinyImages) {
  BinaryMap binary;
  binary.pixels = MaskGrid(8, 8, 1);
  EXPECT_THROW(detect_corners(binary, SiftConfig{}), std::invalid_argument);
}

TEST(SeedPoints, SymmetricSquareCentroid) {
  CornerSet corners;
  corners.points = {{0, 0, 1}, {2, 0, 1}, {0, 2, 1}, {2, 2, 1}};
  const SeedPoints seeds = seed_points(corners, 3, 3);
  EXPECT_DOUBLE_EQ(seeds.centroid_n, 1.0);
  EXPECT_DOUBLE_EQ(seeds.centroid_m, 1.0);
  EXPECT_EQ(seeds.near_n, 1);
  EXPECT_EQ(seeds.near_m, 1);
}

TEST(SeedPoints, SingleCornerRowMajorTieBreak) {
  CornerSet corners;
  corners.points = {{1, 1, 1}};
  const SeedPoints seeds = seed_points(corners, 3, 3);
  EXPECT_EQ(seeds.near_n, 1);
  EXPECT_EQ(seeds.near_m, 1);
  // all four grid corners tie at sqrt(2); first in row-major order wins
  EXPECT_EQ(seeds.far_n, 0);
  EXPECT_EQ(seeds.far_m, 0);
}

TEST(SeedPoints, RejectsEmptyCornerSet) {
  EXPECT_THROW(seed_points(CornerSet{}, 4, 4), std::invalid_argument);
}

TEST(SeedPoints, StripFarthestEndpoint) {
  CornerSet corners;
  corners.points = {{0, 0, 1}};
  const SeedPoints seeds = seed_points(corners, 1, 9);
  EXPECT_EQ(seeds.far_n, 0);
  EXPECT_EQ(seeds.far_m, 8);
}

// near/far must be global optima over every pixel of the image.
TEST(SeedPoints, ExhaustiveOptimalityOnRandomCornerSets) {
  std::uint64_t state = 55;
  for (int trial = 0; trial < 10; ++trial) {
    const int rows = 7 + static_cast<int>(uniform01(state) * 6);
    const int cols = 5 + static_cast<int>(uniform01(state) * 8);
    CornerSet corners;
    const int k = 1 + static_cast<int>(uniform01(state) * 5);
    for (int i = 0; i < k; ++i)
      corners.points.push_back({static_cast<int>(uniform01(state) * rows),
                                static_cast<int>(uniform01(state) * cols), 1.0});
    const SeedPoints seeds = seed_points(corners, rows, cols);

    auto dist_to_centroid = [&](int n, int m) {
      return std::hypot(n - seeds.centroid_n, m - seeds.centroid_m);
    };
    auto avg_dist = [&](int n, int m) {
      double acc = 0.0;
      for (const Corner& c : corners.points) acc += std::hypot(n - c.n, m - c.m);
      return acc / corners.points.size();
    };
    for (int n = 0; n < rows; ++n)
      for (int m = 0; m < cols; ++m) {
        EXPECT_GE(dist_to_centroid(n, m), dist_to_centroid(seeds.near_n, seeds.near_m) - 1e-12);
        EXPECT_LE(avg_dist(n, m), avg_dist(seeds.far_n, seeds.far_m) + 1e-12);
      }
  }
}

}  // namespace
