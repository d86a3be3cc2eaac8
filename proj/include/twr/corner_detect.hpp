#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "twr/grid.hpp"

namespace twr {

struct BinaryMap {
  MaskGrid pixels;
  double threshold_used = 0.0;
};

struct SiftConfig {
  double base_sigma = 1.6;
  int levels_per_octave = 3;  // "oct" in the scale factor k = 2^(1/oct)
  int octave_count = 3;
  double contrast_threshold = 0.03;
  double hessian_edge_ratio_max = 10.0;
  int max_corners = 30;

  double scale_factor() const { return std::pow(2.0, 1.0 / levels_per_octave); }

  void validate() const {
    if (levels_per_octave < 1) throw std::invalid_argument("SiftConfig: levels_per_octave must be >= 1");
    if (octave_count < 1) throw std::invalid_argument("SiftConfig: octave_count must be >= 1");
    if (max_corners < 1) throw std::invalid_argument("SiftConfig: max_corners must be >= 1");
    if (base_sigma <= 0.0) throw std::invalid_argument("SiftConfig: base_sigma must be positive");
  }
};

struct Corner {
  int n = 0;  // row
  int m = 0;  // column
  double response = 0.0;
};

struct CornerSet {
  std::vector<Corner> points;
};

struct SeedPoints {
  int near_n = 0, near_m = 0;
  int far_n = 0, far_m = 0;
  double centroid_n = 0.0, centroid_m = 0.0;
};

/// Binarize at cut * max(map): 1 where pixel >= threshold, 0 elsewhere.
inline BinaryMap threshold_truncate(const RealGrid& map, double cut) {
  if (map.empty()) throw std::invalid_argument("threshold_truncate: empty map");
  if (cut <= 0.0 || cut >= 1.0) throw std::invalid_argument("threshold_truncate: cut must be in (0, 1)");
  const double mx = max_value(map);
  if (mx <= 0.0) throw std::runtime_error("threshold_truncate: empty scene");
  BinaryMap out;
  out.threshold_used = cut * mx;
  out.pixels = MaskGrid(map.rows(), map.cols());
  for (size_t i = 0; i < map.size(); ++i) out.pixels[i] = map[i] >= out.threshold_used ? 1 : 0;
  return out;
}

namespace detail {

/// Separable Gaussian blur with mirrored borders.
inline RealGrid gaussian_blur(const RealGrid& src, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int rows = src.rows(), cols = src.cols();
  auto mirror = [](int i, int n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return std::clamp(i, 0, n - 1);
  };

  RealGrid tmp(rows, cols), out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * src(r, mirror(c + i, cols));
      tmp(r, c) = acc;
    }
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp(mirror(r + i, rows), c);
      out(r, c) = acc;
    }
  return out;
}

inline RealGrid downsample2(const RealGrid& src) {
  RealGrid out((src.rows() + 1) / 2, (src.cols() + 1) / 2);
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out(r, c) = src(2 * r, 2 * c);
  return out;
}

}  // namespace detail

/// DoG keypoints of the thresholded map: strict extrema in the 3x3x3 scale
/// cube, pruned by contrast and by the Hessian edge-ratio test, capped at the
/// strongest max_corners responses. Input is peak-normalized first so detection
/// is invariant to positive scaling.
inline CornerSet detect_corners(const BinaryMap& binary, const SiftConfig& cfg) {
  cfg.validate();
  const int rows = binary.pixels.rows(), cols = binary.pixels.cols();
  if (rows < 16 || cols < 16) throw std::invalid_argument("detect_corners: image smaller than 16x16");

  RealGrid base(rows, cols);
  for (size_t i = 0; i < base.size(); ++i) base[i] = binary.pixels[i];
  base = normalize_unit(base);

  const double k = cfg.scale_factor();
  const double edge_limit =
      (cfg.hessian_edge_ratio_max + 1.0) * (cfg.hessian_edge_ratio_max + 1.0) / cfg.hessian_edge_ratio_max;
  std::vector<Corner> found;

  RealGrid octave_base = base;
  for (int oct = 0; oct < cfg.octave_count; ++oct) {
    if (octave_base.rows() < 8 || octave_base.cols() < 8) break;
    const int n_levels = cfg.levels_per_octave + 3;
    std::vector<RealGrid> gauss(n_levels);
    for (int s = 0; s < n_levels; ++s)
      gauss[s] = detail::gaussian_blur(octave_base, cfg.base_sigma * std::pow(k, s));
    std::vector<RealGrid> dog(n_levels - 1);
    for (int s = 0; s + 1 < n_levels; ++s) {
      dog[s] = RealGrid(octave_base.rows(), octave_base.cols());
      for (size_t i = 0; i < dog[s].size(); ++i) dog[s][i] = gauss[s + 1][i] - gauss[s][i];
    }

    const int scale = 1 << oct;
    for (int s = 1; s + 1 < static_cast<int>(dog.size()); ++s) {
      const RealGrid& d = dog[s];
      for (int r = 1; r + 1 < d.rows(); ++r) {
        for (int c = 1; c + 1 < d.cols(); ++c) {
          const double v = d(r, c);
          if (std::abs(v) < cfg.contrast_threshold) continue;
          bool is_max = true, is_min = true;
          for (int ds = -1; ds <= 1 && (is_max || is_min); ++ds)
            for (int dr = -1; dr <= 1 && (is_max || is_min); ++dr)
              for (int dc = -1; dc <= 1; ++dc) {
                if (ds == 0 && dr == 0 && dc == 0) continue;
                const double u = dog[s + ds](r + dr, c + dc);
                if (u >= v) is_max = false;
                if (u <= v) is_min = false;
                if (!is_max && !is_min) break;
              }
          if (!is_max && !is_min) continue;

          const double dnn = d(r + 1, c) + d(r - 1, c) - 2.0 * v;
          const double dmm = d(r, c + 1) + d(r, c - 1) - 2.0 * v;
          const double dnm = (d(r + 1, c + 1) - d(r + 1, c - 1) - d(r - 1, c + 1) + d(r - 1, c - 1)) / 4.0;
          const double tr = dnn + dmm;
          const double det = dnn * dmm - dnm * dnm;
          if (det <= 0.0 || tr * tr / det > edge_limit) continue;

          found.push_back({r * scale, c * scale, std::abs(v)});
        }
      }
    }
    octave_base = detail::downsample2(gauss[cfg.levels_per_octave]);
  }

  if (found.empty()) throw std::runtime_error("detect_corners: no corners");
  std::stable_sort(found.begin(), found.end(),
                   [](const Corner& a, const Corner& b) { return a.response > b.response; });
  if (static_cast<int>(found.size()) > cfg.max_corners) found.resize(cfg.max_corners);
  return CornerSet{std::move(found)};
}

/// Seed geometry from the corners: centroid, the pixel nearest the centroid,
/// and the pixel with the largest mean distance to all corners. Ties resolve
/// to the first pixel in row-major order.
inline SeedPoints seed_points(const CornerSet& corners, int rows, int cols) {
  if (corners.points.empty()) throw std::invalid_argument("seed_points: empty corner set");
  SeedPoints out;
  for (const Corner& c : corners.points) {
    out.centroid_n += c.n;
    out.centroid_m += c.m;
  }
  out.centroid_n /= corners.points.size();
  out.centroid_m /= corners.points.size();

  double best_near = std::numeric_limits<double>::infinity();
  double best_far = -1.0;
  for (int n = 0; n < rows; ++n) {
    for (int m = 0; m < cols; ++m) {
      const double dn = n - out.centroid_n;
      const double dm = m - out.centroid_m;
      const double d_centroid = std::sqrt(dn * dn + dm * dm);
      if (d_centroid < best_near) {
        best_near = d_centroid;
        out.near_n = n;
        out.near_m = m;
      }
      double avg = 0.0;
      for (const Corner& c : corners.points) {
        const double an = n - c.n;
        const double am = m - c.m;
        avg += std::sqrt(an * an + am * am);
      }
      avg /= corners.points.size();
      if (avg > best_far) {
        best_far = avg;
        out.far_n = n;
        out.far_m = m;
      }
    }
  }
  return out;
}

}  // namespace twr
