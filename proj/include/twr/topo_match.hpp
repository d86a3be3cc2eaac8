#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "twr/grid.hpp"

namespace twr {

struct Point2 {
  double x = 0.0;  // column coordinate
  double y = 0.0;  // row coordinate
};

struct PointCloud {
  std::vector<Point2> points;
};

/// Zero-level contour of phi by marching squares with linear interpolation on
/// crossing edges. Cells are scanned in raster order and each cell emits its
/// segment endpoints, so vertices come out in traversal order, in pixel units
/// (x along columns, y along rows). Sign convention matches the region split:
/// phi >= 0 is inside.
inline PointCloud contour_pointcloud(const RealGrid& phi) {
  const int rows = phi.rows(), cols = phi.cols();
  PointCloud pc;
  auto interp = [](double a, double b) { return a / (a - b); };

  for (int r = 0; r + 1 < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) {
      const double tl = phi(r, c);
      const double tr = phi(r, c + 1);
      const double bl = phi(r + 1, c);
      const double br = phi(r + 1, c + 1);
      const int config = ((br >= 0.0) << 3) | ((bl >= 0.0) << 2) | ((tr >= 0.0) << 1) | (tl >= 0.0);
      if (config == 0b0000 || config == 0b1111) continue;

      const double y = r, x = c;
      Point2 left_edge{x, y + interp(tl, bl)};
      Point2 right_edge{x + 1.0, y + interp(tr, br)};
      Point2 top_edge{x + interp(tl, tr), y};
      Point2 bottom_edge{x + interp(bl, br), y + 1.0};

      auto emit = [&pc](const Point2& a, const Point2& b) {
        pc.points.push_back(a);
        pc.points.push_back(b);
      };
      switch (config) {
        case 0b0001: case 0b1110: emit(top_edge, left_edge); break;
        case 0b0010: case 0b1101: emit(top_edge, right_edge); break;
        case 0b0011: case 0b1100: emit(left_edge, right_edge); break;
        case 0b0100: case 0b1011: emit(left_edge, bottom_edge); break;
        case 0b0101: case 0b1010: emit(top_edge, bottom_edge); break;
        case 0b0111: case 0b1000: emit(right_edge, bottom_edge); break;
        case 0b0110: case 0b1001: emit(top_edge, left_edge); emit(right_edge, bottom_edge); break;
        default: break;
      }
    }
  }
  if (pc.points.empty()) throw std::runtime_error("contour_pointcloud: empty contour");
  return pc;
}

// ---------------------------------------------------------------------------
// Mapper cover over the joint bounding box and the edge-set graph
// ---------------------------------------------------------------------------

struct MapperCover {
  int n_x = 100, n_y = 100;
  double overlap_factor = 1.5;  // "of" > 1
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  double step_x = 0.0, step_y = 0.0;
  double s_x = 0.0, s_y = 0.0;

  bool operator==(const MapperCover& o) const {
    return n_x == o.n_x && n_y == o.n_y && overlap_factor == o.overlap_factor && min_x == o.min_x &&
           max_x == o.max_x && min_y == o.min_y && max_y == o.max_y;
  }
};

/// Rectangular cover over the joint bounds of both clouds: n-1 steps per axis,
/// cells of size step * of centered on the lattice. A degenerate axis is
/// widened by half a unit on each side.
inline MapperCover build_cover(const PointCloud& pc_a, const PointCloud& pc_b, int n_x, int n_y, double of) {
  if (pc_a.points.empty() || pc_b.points.empty()) throw std::invalid_argument("build_cover: empty point cloud");
  if (n_x < 2 || n_y < 2) throw std::invalid_argument("build_cover: need at least 2 cells per axis");
  if (of <= 1.0) throw std::invalid_argument("build_cover: overlap factor must exceed 1");

  MapperCover cov;
  cov.n_x = n_x;
  cov.n_y = n_y;
  cov.overlap_factor = of;
  cov.min_x = cov.max_x = pc_a.points[0].x;
  cov.min_y = cov.max_y = pc_a.points[0].y;
  for (const PointCloud* pc : {&pc_a, &pc_b})
    for (const Point2& p : pc->points) {
      cov.min_x = std::min(cov.min_x, p.x);
      cov.max_x = std::max(cov.max_x, p.x);
      cov.min_y = std::min(cov.min_y, p.y);
      cov.max_y = std::max(cov.max_y, p.y);
    }
  if (cov.max_x <= cov.min_x) {
    cov.min_x -= 0.5;
    cov.max_x += 0.5;
  }
  if (cov.max_y <= cov.min_y) {
    cov.min_y -= 0.5;
    cov.max_y += 0.5;
  }
  cov.step_x = (cov.max_x - cov.min_x) / (n_x - 1);
  cov.step_y = (cov.max_y - cov.min_y) / (n_y - 1);
  cov.s_x = cov.step_x * of;
  cov.s_y = cov.step_y * of;
  return cov;
}

/// Edge of the cover nerve: horizontal edges connect (i,j)->(i+1,j), vertical
/// edges (i,j)->(i,j+1). Encoded as a single id for set arithmetic.
using EdgeId = std::uint32_t;

inline EdgeId make_edge_id(bool vertical, int i, int j) {
  return (static_cast<EdgeId>(vertical) << 24) | (static_cast<EdgeId>(i) << 12) | static_cast<EdgeId>(j);
}

struct EdgeSet {
  MapperCover cover;
  std::vector<EdgeId> edges;  // sorted, unique
};

namespace detail {

/// Overlap rectangle of a horizontal edge (i,j)->(i+1,j); closed intervals.
inline bool in_horizontal_overlap(const MapperCover& cov, int i, int j, double x, double y) {
  const double x_lo = cov.min_x + (i + 1) * cov.step_x - cov.s_x / 2.0;
  const double x_hi = cov.min_x + i * cov.step_x + cov.s_x / 2.0;
  const double y_lo = cov.min_y + j * cov.step_y - cov.s_y / 2.0;
  const double y_hi = cov.min_y + j * cov.step_y + cov.s_y / 2.0;
  return x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi;
}

/// Overlap rectangle of a vertical edge (i,j)->(i,j+1); the transpose of the
/// horizontal form (full cell interval in x, shifted intersection in y).
inline bool in_vertical_overlap(const MapperCover& cov, int i, int j, double x, double y) {
  const double x_lo = cov.min_x + i * cov.step_x - cov.s_x / 2.0;
  const double x_hi = cov.min_x + i * cov.step_x + cov.s_x / 2.0;
  const double y_lo = cov.min_y + (j + 1) * cov.step_y - cov.s_y / 2.0;
  const double y_hi = cov.min_y + j * cov.step_y + cov.s_y / 2.0;
  return x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi;
}

}  // namespace detail

/// Edges whose overlap rectangle contains at least one cloud point. Candidate
/// lattice indices are located arithmetically per point, then verified with
/// the same closed-interval tests a brute-force scan would use.
inline EdgeSet edge_set(const PointCloud& pc, const MapperCover& cov) {
  std::vector<EdgeId> edges;
  const double half = cov.overlap_factor / 2.0;
  for (const Point2& p : pc.points) {
    const double fx = (p.x - cov.min_x) / cov.step_x;
    const double fy = (p.y - cov.min_y) / cov.step_y;

    // horizontal edges: i in [fx - of/2, fx + of/2 - 1], j in [fy - of/2, fy + of/2]
    {
      const int i_lo = std::max(0, static_cast<int>(std::ceil(fx - half)) - 1);
      const int i_hi = std::min(cov.n_x - 2, static_cast<int>(std::floor(fx + half - 1.0)) + 1);
      const int j_lo = std::max(0, static_cast<int>(std::ceil(fy - half)) - 1);
      const int j_hi = std::min(cov.n_y - 1, static_cast<int>(std::floor(fy + half)) + 1);
      for (int i = i_lo; i <= i_hi; ++i)
        for (int j = j_lo; j <= j_hi; ++j)
          if (detail::in_horizontal_overlap(cov, i, j, p.x, p.y)) edges.push_back(make_edge_id(false, i, j));
    }
    // vertical edges: i in [fx - of/2, fx + of/2], j in [fy - of/2, fy + of/2 - 1]
    {
      const int i_lo = std::max(0, static_cast<int>(std::ceil(fx - half)) - 1);
      const int i_hi = std::min(cov.n_x - 1, static_cast<int>(std::floor(fx + half)) + 1);
      const int j_lo = std::max(0, static_cast<int>(std::ceil(fy - half)) - 1);
      const int j_hi = std::min(cov.n_y - 2, static_cast<int>(std::floor(fy + half - 1.0)) + 1);
      for (int i = i_lo; i <= i_hi; ++i)
        for (int j = j_lo; j <= j_hi; ++j)
          if (detail::in_vertical_overlap(cov, i, j, p.x, p.y)) edges.push_back(make_edge_id(true, i, j));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return EdgeSet{cov, std::move(edges)};
}

/// |intersection| / |union| of two edge sets over the same cover. Two empty
/// graphs count as identical (similarity 1).
inline double jaccard_similarity(const EdgeSet& a, const EdgeSet& b) {
  if (!(a.cover == b.cover)) throw std::invalid_argument("jaccard_similarity: edge sets built over different covers");
  if (a.edges.empty() && b.edges.empty()) return 1.0;
  size_t inter = 0;
  size_t ai = 0, bi = 0;
  while (ai < a.edges.size() && bi < b.edges.size()) {
    if (a.edges[ai] == b.edges[bi]) {
      ++inter;
      ++ai;
      ++bi;
    } else if (a.edges[ai] < b.edges[bi]) {
      ++ai;
    } else {
      ++bi;
    }
  }
  const size_t uni = a.edges.size() + b.edges.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// Template library and argmax classification
// ---------------------------------------------------------------------------

struct TemplateLibrary {
  std::vector<std::string> class_names;               // size Cla
  std::vector<std::vector<PointCloud>> templates;     // Cla x Cla_Num
  std::string map_type;                               // "rtm" | "dtm"
  int cover_nx = 100, cover_ny = 100;
  double cover_overlap = 1.5;

  int class_count() const { return static_cast<int>(templates.size()); }

  void validate() const {
    if (templates.empty()) throw std::invalid_argument("TemplateLibrary: no classes");
    const size_t per_class = templates[0].size();
    if (per_class == 0) throw std::invalid_argument("TemplateLibrary: empty class");
    for (const auto& cls : templates)
      if (cls.size() != per_class) throw std::invalid_argument("TemplateLibrary: uneven class sizes");
  }
};

struct ClassificationResult {
  int label = 0;                                   // 1-based class index
  std::vector<double> class_sums;                  // per-class summed similarity
  std::vector<std::vector<double>> score_table;    // per class, per template
};

/// Eq.-style scoring: every template gets a joint cover with the input cloud,
/// both edge sets are built on it and Jaccard-scored; the class with the
/// largest summed similarity wins, earliest class on ties.
inline ClassificationResult classify(const PointCloud& pc, const TemplateLibrary& lib) {
  lib.validate();
  if (pc.points.empty()) throw std::invalid_argument("classify: empty input cloud");

  ClassificationResult result;
  result.class_sums.resize(lib.templates.size(), 0.0);
  result.score_table.resize(lib.templates.size());
  for (size_t cls = 0; cls < lib.templates.size(); ++cls) {
    result.score_table[cls].reserve(lib.templates[cls].size());
    for (const PointCloud& tmpl : lib.templates[cls]) {
      const MapperCover cov = build_cover(pc, tmpl, lib.cover_nx, lib.cover_ny, lib.cover_overlap);
      const double sim = jaccard_similarity(edge_set(pc, cov), edge_set(tmpl, cov));
      result.score_table[cls].push_back(sim);
      result.class_sums[cls] += sim;
    }
  }
  size_t best = 0;
  for (size_t cls = 1; cls < result.class_sums.size(); ++cls)
    if (result.class_sums[cls] > result.class_sums[best]) best = cls;
  result.label = static_cast<int>(best) + 1;
  return result;
}

}  // namespace twr
