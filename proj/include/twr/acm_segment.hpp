#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "twr/corner_detect.hpp"
#include "twr/grid.hpp"

namespace twr {

// ---------------------------------------------------------------------------
// Dual-level-set four-phase Chan-Vese segmentation.
//
// The energy is the four-phase fitting functional with smoothed Heaviside
// weights plus length regularization of both zero contours. It is discretized
// with forward-difference gradient magnitudes (floored to avoid division by
// zero), and the evolution uses the exact gradient of that discrete energy,
// so finite differences of discrete_energy() reproduce level_set_gradient().
// ---------------------------------------------------------------------------

inline double smooth_heaviside(double s, double eps) {
  return 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(s / eps));
}

inline double smooth_dirac(double s, double eps) {
  return eps / (std::numbers::pi * (eps * eps + s * s));
}

inline double smooth_dirac_deriv(double s, double eps) {
  const double d = eps * eps + s * s;
  return -2.0 * eps * s / (std::numbers::pi * d * d);
}

// Fit weights and step are scaled up relative to the usual unit-lambda
// convention: with the +-1 binary disk initialization the fronts move
// O(t * lambda * delta_eps) phi-units per step, and the iteration budget is
// fixed, so the lambda * t product is what sets how far the phases can
// reorganize. The floor doubles as the smoothing scale of |grad phi|; far
// below ~0.1 the discrete length term is effectively kinked at flat regions
// and explicit descent overshoots.
struct ChanVeseConfig {
  double lambda_pp = 32.0, lambda_pm = 32.0, lambda_mp = 32.0, lambda_mm = 32.0;
  double mu1 = 0.5, mu2 = 0.5;
  double heaviside_eps = 1.0;
  double time_step = 1.0;
  double seed_radius1 = 32.0;  // foreground disk about the near seed
  double seed_radius2 = 32.0;  // background disk about the far seed
  int max_alternations = 70;
  int gradient_steps_cap = 70;
  double stop_threshold = 1e-3;  // sup-norm change per step, in phi units
  double curvature_denominator_floor = 0.5;

  void validate() const {
    if (lambda_pp <= 0.0 || lambda_pm <= 0.0 || lambda_mp <= 0.0 || lambda_mm <= 0.0)
      throw std::invalid_argument("ChanVeseConfig: fit weights must be positive");
    if (mu1 <= 0.0 || mu2 <= 0.0) throw std::invalid_argument("ChanVeseConfig: length weights must be positive");
    if (heaviside_eps <= 0.0) throw std::invalid_argument("ChanVeseConfig: heaviside_eps must be positive");
    if (time_step <= 0.0) throw std::invalid_argument("ChanVeseConfig: time_step must be positive");
    if (seed_radius1 < 1.0 || seed_radius2 < 1.0) throw std::invalid_argument("ChanVeseConfig: radii must be >= 1");
    if (max_alternations < 1 || gradient_steps_cap < 1)
      throw std::invalid_argument("ChanVeseConfig: iteration caps must be >= 1");
    if (stop_threshold <= 0.0) throw std::invalid_argument("ChanVeseConfig: stop_threshold must be positive");
    if (curvature_denominator_floor <= 0.0)
      throw std::invalid_argument("ChanVeseConfig: curvature floor must be positive");
  }
};

struct LevelSetPair {
  RealGrid phi1, phi2;
  int iterations = 0;
};

struct RegionMeans {
  double c_pp = 0.0, c_pm = 0.0, c_mp = 0.0, c_mm = 0.0;
};

struct SegmentationResult {
  LevelSetPair level_sets;
  MaskGrid mask_pp, mask_pm, mask_mp, mask_mm;
  double final_energy = 0.0;
  int iterations = 0;

  /// Omega_{+-} is the extracted micro-Doppler signature region.
  const MaskGrid& feature_mask() const { return mask_pm; }
};

/// Binary +-1 disks: phi1 = +1 strictly inside radius rho1 about the near
/// seed, phi2 likewise about the far seed.
inline LevelSetPair init_level_sets(const SeedPoints& seeds, const ChanVeseConfig& cfg, int rows, int cols) {
  LevelSetPair pair;
  pair.phi1 = RealGrid(rows, cols);
  pair.phi2 = RealGrid(rows, cols);
  const double r1sq = cfg.seed_radius1 * cfg.seed_radius1;
  const double r2sq = cfg.seed_radius2 * cfg.seed_radius2;
  for (int n = 0; n < rows; ++n)
    for (int m = 0; m < cols; ++m) {
      const double d1 = static_cast<double>(n - seeds.near_n) * (n - seeds.near_n) +
                        static_cast<double>(m - seeds.near_m) * (m - seeds.near_m);
      const double d2 = static_cast<double>(n - seeds.far_n) * (n - seeds.far_n) +
                        static_cast<double>(m - seeds.far_m) * (m - seeds.far_m);
      pair.phi1(n, m) = d1 < r1sq ? 1.0 : -1.0;
      pair.phi2(n, m) = d2 < r2sq ? 1.0 : -1.0;
    }
  return pair;
}

/// Heaviside-weighted region averages. A region whose weight mass vanishes
/// keeps its previous mean.
inline RegionMeans update_region_means(const RealGrid& image, const LevelSetPair& pair, double eps,
                                       const RegionMeans& previous) {
  double num_pp = 0.0, den_pp = 0.0, num_pm = 0.0, den_pm = 0.0;
  double num_mp = 0.0, den_mp = 0.0, num_mm = 0.0, den_mm = 0.0;
  for (size_t i = 0; i < image.size(); ++i) {
    const double h1 = smooth_heaviside(pair.phi1[i], eps);
    const double h2 = smooth_heaviside(pair.phi2[i], eps);
    const double v = image[i];
    num_pp += v * h1 * h2;
    den_pp += h1 * h2;
    num_pm += v * h1 * (1.0 - h2);
    den_pm += h1 * (1.0 - h2);
    num_mp += v * (1.0 - h1) * h2;
    den_mp += (1.0 - h1) * h2;
    num_mm += v * (1.0 - h1) * (1.0 - h2);
    den_mm += (1.0 - h1) * (1.0 - h2);
  }
  RegionMeans out = previous;
  constexpr double kTiny = 1e-300;
  if (den_pp > kTiny) out.c_pp = num_pp / den_pp;
  if (den_pm > kTiny) out.c_pm = num_pm / den_pm;
  if (den_mp > kTiny) out.c_mp = num_mp / den_mp;
  if (den_mm > kTiny) out.c_mm = num_mm / den_mm;
  return out;
}

namespace detail {

/// Forward differences with a zero row/column at the far edge, and the
/// floored gradient magnitude sqrt(fx^2 + fy^2 + floor^2).
struct ForwardGradient {
  RealGrid fx, fy, mag;

  ForwardGradient(const RealGrid& phi, double floor) {
    const int rows = phi.rows(), cols = phi.cols();
    fx = RealGrid(rows, cols);
    fy = RealGrid(rows, cols);
    mag = RealGrid(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double dx = r + 1 < rows ? phi(r + 1, c) - phi(r, c) : 0.0;
        const double dy = c + 1 < cols ? phi(r, c + 1) - phi(r, c) : 0.0;
        fx(r, c) = dx;
        fy(r, c) = dy;
        mag(r, c) = std::sqrt(dx * dx + dy * dy + floor * floor);
      }
  }
};

/// Exact gradient of mu * sum delta_eps(phi) * |grad phi| for the forward
/// discretization: the delta' term plus the (adjoint) backward divergence of
/// the normalized forward-difference quotients.
inline RealGrid length_gradient(const RealGrid& phi, double mu, double eps, double floor) {
  const int rows = phi.rows(), cols = phi.cols();
  const ForwardGradient g(phi, floor);
  RealGrid vx(rows, cols), vy(rows, cols), out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double d = smooth_dirac(phi(r, c), eps) / g.mag(r, c);
      vx(r, c) = d * g.fx(r, c);
      vy(r, c) = d * g.fy(r, c);
    }
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double div_x = vx(r, c) - (r > 0 ? vx(r - 1, c) : 0.0);
      const double div_y = vy(r, c) - (c > 0 ? vy(r, c - 1) : 0.0);
      out(r, c) = mu * (smooth_dirac_deriv(phi(r, c), eps) * g.mag(r, c) - div_x - div_y);
    }
  return out;
}

}  // namespace detail

/// dE/dphi1 and dE/dphi2 at frozen region means.
inline std::pair<RealGrid, RealGrid> level_set_gradient(const RealGrid& image, const LevelSetPair& pair,
                                                        const RegionMeans& means, const ChanVeseConfig& cfg) {
  const double eps = cfg.heaviside_eps;
  RealGrid g1 = detail::length_gradient(pair.phi1, cfg.mu1, eps, cfg.curvature_denominator_floor);
  RealGrid g2 = detail::length_gradient(pair.phi2, cfg.mu2, eps, cfg.curvature_denominator_floor);
  for (size_t i = 0; i < image.size(); ++i) {
    const double v = image[i];
    const double dpp = (v - means.c_pp) * (v - means.c_pp);
    const double dpm = (v - means.c_pm) * (v - means.c_pm);
    const double dmp = (v - means.c_mp) * (v - means.c_mp);
    const double dmm = (v - means.c_mm) * (v - means.c_mm);
    const double h1 = smooth_heaviside(pair.phi1[i], eps);
    const double h2 = smooth_heaviside(pair.phi2[i], eps);
    g1[i] += smooth_dirac(pair.phi1[i], eps) *
             (cfg.lambda_pp * h2 * dpp + cfg.lambda_pm * (1.0 - h2) * dpm -
              cfg.lambda_mp * h2 * dmp - cfg.lambda_mm * (1.0 - h2) * dmm);
    g2[i] += smooth_dirac(pair.phi2[i], eps) *
             (cfg.lambda_pp * h1 * dpp - cfg.lambda_pm * h1 * dpm +
              cfg.lambda_mp * (1.0 - h1) * dmp - cfg.lambda_mm * (1.0 - h1) * dmm);
  }
  return {std::move(g1), std::move(g2)};
}

/// One explicit gradient-descent step on both level sets (double-buffered:
/// both gradients are evaluated on the incoming iterate).
inline LevelSetPair level_set_step(const RealGrid& image, const LevelSetPair& pair, const RegionMeans& means,
                                   const ChanVeseConfig& cfg) {
  auto [g1, g2] = level_set_gradient(image, pair, means, cfg);
  LevelSetPair out = pair;
  for (size_t i = 0; i < image.size(); ++i) {
    out.phi1[i] -= cfg.time_step * g1[i];
    out.phi2[i] -= cfg.time_step * g2[i];
  }
  out.iterations = pair.iterations + 1;
  if (!all_finite(out.phi1) || !all_finite(out.phi2))
    throw std::domain_error("level_set_step: non-finite update (check step size / floor)");
  return out;
}

/// Discrete four-phase energy at frozen means; the object whose exact
/// gradient drives level_set_step.
inline double discrete_energy(const RealGrid& image, const LevelSetPair& pair, const RegionMeans& means,
                              const ChanVeseConfig& cfg) {
  const double eps = cfg.heaviside_eps;
  const detail::ForwardGradient grad1(pair.phi1, cfg.curvature_denominator_floor);
  const detail::ForwardGradient grad2(pair.phi2, cfg.curvature_denominator_floor);
  double acc = 0.0;
  for (size_t i = 0; i < image.size(); ++i) {
    acc += cfg.mu1 * smooth_dirac(pair.phi1[i], eps) * grad1.mag[i];
    acc += cfg.mu2 * smooth_dirac(pair.phi2[i], eps) * grad2.mag[i];
    const double v = image[i];
    const double h1 = smooth_heaviside(pair.phi1[i], eps);
    const double h2 = smooth_heaviside(pair.phi2[i], eps);
    acc += cfg.lambda_pp * (v - means.c_pp) * (v - means.c_pp) * h1 * h2;
    acc += cfg.lambda_pm * (v - means.c_pm) * (v - means.c_pm) * h1 * (1.0 - h2);
    acc += cfg.lambda_mp * (v - means.c_mp) * (v - means.c_mp) * (1.0 - h1) * h2;
    acc += cfg.lambda_mm * (v - means.c_mm) * (v - means.c_mm) * (1.0 - h1) * (1.0 - h2);
  }
  return acc;
}

/// Alternating minimization: update means, take one gradient step, repeat
/// until the level-set sup-norm change drops below the stop threshold or an
/// iteration cap is reached. The image must be normalized to [0, 1].
inline SegmentationResult evolve(const RealGrid& image, const SeedPoints& seeds, const ChanVeseConfig& cfg) {
  cfg.validate();
  if (image.empty()) throw std::invalid_argument("evolve: empty image");
  if (min_value(image) < 0.0 || max_value(image) > 1.0 + 1e-12)
    throw std::invalid_argument("evolve: image must be normalized to [0, 1]");

  const int rows = image.rows(), cols = image.cols();
  LevelSetPair pair = init_level_sets(seeds, cfg, rows, cols);
  double image_mean = 0.0;
  for (double v : image.raw()) image_mean += v;
  image_mean /= static_cast<double>(image.size());
  RegionMeans means{image_mean, image_mean, image_mean, image_mean};

  const int rounds = std::min(cfg.max_alternations, cfg.gradient_steps_cap);
  for (int k = 0; k < rounds; ++k) {
    means = update_region_means(image, pair, cfg.heaviside_eps, means);
    LevelSetPair next = level_set_step(image, pair, means, cfg);
    double max_change = 0.0;
    for (size_t i = 0; i < image.size(); ++i) {
      max_change = std::max(max_change, std::abs(next.phi1[i] - pair.phi1[i]));
      max_change = std::max(max_change, std::abs(next.phi2[i] - pair.phi2[i]));
    }
    pair = std::move(next);
    if (max_change < cfg.stop_threshold) break;
  }

  SegmentationResult result;
  result.mask_pp = MaskGrid(rows, cols);
  result.mask_pm = MaskGrid(rows, cols);
  result.mask_mp = MaskGrid(rows, cols);
  result.mask_mm = MaskGrid(rows, cols);
  for (size_t i = 0; i < image.size(); ++i) {
    const bool p1 = pair.phi1[i] >= 0.0;
    const bool p2 = pair.phi2[i] >= 0.0;
    result.mask_pp[i] = p1 && p2;
    result.mask_pm[i] = p1 && !p2;
    result.mask_mp[i] = !p1 && p2;
    result.mask_mm[i] = !p1 && !p2;
  }
  result.final_energy = discrete_energy(image, pair, means, cfg);
  result.iterations = pair.iterations;
  result.level_sets = std::move(pair);
  return result;
}

}  // namespace twr
