#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace twr {

namespace detail {

/// Natural cubic spline through strictly increasing knots.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    if (n != y_.size() || n == 0) throw std::invalid_argument("CubicSpline: bad knots");
    m_.assign(n, 0.0);
    if (n < 3) return;  // fewer than 3 knots degrades to linear interpolation

    // Thomas algorithm on the tridiagonal system for second derivatives,
    // natural boundary conditions (m[0] = m[n-1] = 0).
    std::vector<double> diag(n, 2.0), rhs(n, 0.0), cprime(n, 0.0);
    std::vector<double> h(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];
    for (size_t i = 1; i + 1 < n; ++i)
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]) / (h[i - 1] + h[i]);
    // sub/super diagonals are h[i-1]/(h[i-1]+h[i]) and h[i]/(h[i-1]+h[i])
    for (size_t i = 1; i + 1 < n; ++i) {
      const double lower = h[i - 1] / (h[i - 1] + h[i]);
      const double upper = h[i] / (h[i - 1] + h[i]);
      const double prev_c = (i == 1) ? 0.0 : cprime[i - 1];
      const double denom = diag[i] - lower * prev_c;
      cprime[i] = upper / denom;
      rhs[i] = (rhs[i] - lower * ((i == 1) ? 0.0 : rhs[i - 1])) / denom;
    }
    for (size_t i = n - 2; i >= 1; --i) m_[i] = rhs[i] - cprime[i] * m_[i + 1];
  }

  double eval(double t) const {
    const size_t n = x_.size();
    if (n == 1) return y_[0];
    // clamp to the outermost segments for extrapolation
    size_t i = 0;
    if (t >= x_[n - 2])
      i = n - 2;
    else {
      size_t lo = 0, hi = n - 2;
      while (lo < hi) {
        const size_t mid = (lo + hi + 1) / 2;
        if (x_[mid] <= t)
          lo = mid;
        else
          hi = mid - 1;
      }
      i = lo;
    }
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h;
    const double b = (t - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

inline void find_extrema(const std::vector<double>& s, std::vector<int>& maxima, std::vector<int>& minima) {
  maxima.clear();
  minima.clear();
  const int n = static_cast<int>(s.size());
  for (int i = 1; i + 1 < n; ++i) {
    if (s[i] > s[i - 1] && s[i] > s[i + 1]) maxima.push_back(i);
    if (s[i] < s[i - 1] && s[i] < s[i + 1]) minima.push_back(i);
  }
}

/// Spline envelope through extrema, with the first/last two extrema mirrored
/// about the series ends to suppress endpoint swing.
inline std::vector<double> envelope(const std::vector<double>& s, const std::vector<int>& extrema) {
  const int n = static_cast<int>(s.size());
  std::vector<double> xs, ys;
  const int k = static_cast<int>(extrema.size());
  const int mirror = std::min(2, k);
  for (int i = mirror - 1; i >= 0; --i) {
    xs.push_back(-static_cast<double>(extrema[i]));
    ys.push_back(s[extrema[i]]);
  }
  for (int i = 0; i < k; ++i) {
    xs.push_back(static_cast<double>(extrema[i]));
    ys.push_back(s[extrema[i]]);
  }
  for (int i = 0; i < mirror; ++i) {
    xs.push_back(2.0 * (n - 1) - static_cast<double>(extrema[k - 1 - i]));
    ys.push_back(s[extrema[k - 1 - i]]);
  }
  CubicSpline spline(std::move(xs), std::move(ys));
  std::vector<double> env(n);
  for (int i = 0; i < n; ++i) env[i] = spline.eval(static_cast<double>(i));
  return env;
}

}  // namespace detail

struct EmdDecomposition {
  std::vector<std::vector<double>> imfs;
  std::vector<double> residual;
};

/// Empirical mode decomposition by standard sifting. Stops an IMF when the
/// Cauchy SD ratio between consecutive sift iterates falls below sd_tolerance
/// or the iteration cap is hit; decomposition ends when the residual has too
/// few extrema to support envelopes. Sum of IMFs plus residual reconstructs
/// the input to rounding error.
inline EmdDecomposition emd_decompose(const std::vector<double>& series, int max_imfs,
                                      double sd_tolerance, int max_sift_iterations) {
  if (series.size() < 8) throw std::invalid_argument("emd_decompose: series too short");
  EmdDecomposition out;
  std::vector<double> residual = series;
  std::vector<int> maxima, minima;

  for (int k = 0; k < max_imfs; ++k) {
    detail::find_extrema(residual, maxima, minima);
    if (maxima.size() < 2 || minima.size() < 2) break;

    std::vector<double> h = residual;
    for (int it = 0; it < max_sift_iterations; ++it) {
      detail::find_extrema(h, maxima, minima);
      if (maxima.size() < 2 || minima.size() < 2) break;
      const std::vector<double> upper = detail::envelope(h, maxima);
      const std::vector<double> lower = detail::envelope(h, minima);

      double num = 0.0, den = 0.0;
      std::vector<double> h_next(h.size());
      for (size_t i = 0; i < h.size(); ++i) {
        const double mean = 0.5 * (upper[i] + lower[i]);
        h_next[i] = h[i] - mean;
        num += mean * mean;  // (h - h_next)^2
        den += h[i] * h[i];
      }
      h.swap(h_next);
      if (num / (den + 1e-300) < sd_tolerance) break;
    }

    out.imfs.push_back(h);
    for (size_t i = 0; i < residual.size(); ++i) residual[i] -= h[i];
  }

  out.residual = std::move(residual);
  return out;
}

}  // namespace twr
