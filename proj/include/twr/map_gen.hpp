#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "twr/echo_sim.hpp"
#include "twr/emd.hpp"
#include "twr/grid.hpp"

namespace twr {

struct EmdConfig {
  int max_imfs = 10;
  int keep_from = 3;  // k0: first preserved mode
  double sift_stop_tolerance = 0.2;
  int max_sift_iterations = 100;

  void validate() const {
    if (keep_from < 1 || keep_from > max_imfs) throw std::invalid_argument("EmdConfig: need 1 <= k0 <= K");
    if (sift_stop_tolerance <= 0.0) throw std::invalid_argument("EmdConfig: bad sift tolerance");
    if (max_sift_iterations < 1) throw std::invalid_argument("EmdConfig: bad sift iteration cap");
  }
};

struct StftConfig {
  double window_len_s = 0.5;
  double hop_s = 0.05;

  int window_samples(double pri_s) const { return static_cast<int>(std::lround(window_len_s / pri_s)); }
  int hop_samples(double pri_s) const { return std::max(1, static_cast<int>(std::lround(hop_s / pri_s))); }

  void validate(double pri_s) const {
    if (hop_s <= 0.0 || hop_s > window_len_s) throw std::invalid_argument("StftConfig: need 0 < hop <= window");
    if (window_samples(pri_s) < 4) throw std::invalid_argument("StftConfig: window shorter than 4 samples");
  }
};

struct RangeTimeMap {
  RealGrid pixels;                 // range bins x slow time
  std::vector<double> range_axis;  // meters per row
  std::vector<double> time_axis;   // seconds per column
};

struct DopplerTimeMap {
  RealGrid pixels;                   // Doppler bins x window centers
  std::vector<double> doppler_axis;  // Hz per row, ascending over [-fr/2, fr/2)
  std::vector<double> time_axis;     // seconds per column (window centers)
};

/// Slow-time first difference; cancels static returns exactly. Column 0 is zero.
inline EchoMatrix mti_filter(const EchoMatrix& echo) {
  const int n_fast = echo.data.rows();
  const int n_slow = echo.data.cols();
  if (n_slow < 2) throw std::invalid_argument("mti_filter: need at least 2 pulses");
  EchoMatrix out;
  out.params = echo.params;
  out.data = ComplexGrid(n_fast, n_slow);
  for (int n = 0; n < n_fast; ++n)
    for (int m = 1; m < n_slow; ++m) out.data(n, m) = echo.data(n, m) - echo.data(n, m - 1);
  return out;
}

inline RangeTimeMap rtm_from_echo(const EchoMatrix& echo) {
  RangeTimeMap rtm;
  rtm.pixels = RealGrid(echo.data.rows(), echo.data.cols());
  for (size_t i = 0; i < echo.data.size(); ++i) rtm.pixels[i] = std::abs(echo.data[i]);
  rtm.range_axis.resize(echo.data.rows());
  for (int n = 0; n < echo.data.rows(); ++n) rtm.range_axis[n] = n * echo.params.range_bin_m();
  rtm.time_axis.resize(echo.data.cols());
  for (int m = 0; m < echo.data.cols(); ++m) rtm.time_axis[m] = m * echo.params.pri_s;
  return rtm;
}

/// Per-range-bin EMD along slow time, discarding the first k0-1 modes.
/// Bins whose series admit no IMFs pass through unchanged.
inline RangeTimeMap emd_denoise(const RangeTimeMap& rtm, const EmdConfig& cfg) {
  cfg.validate();
  const int n_bins = rtm.pixels.rows();
  const int n_slow = rtm.pixels.cols();
  if (n_slow < 8) throw std::invalid_argument("emd_denoise: need at least 8 slow-time samples");

  RangeTimeMap out = rtm;
  std::vector<double> series(n_slow);
  for (int n = 0; n < n_bins; ++n) {
    for (int m = 0; m < n_slow; ++m) series[m] = rtm.pixels(n, m);
    const EmdDecomposition dec =
        emd_decompose(series, cfg.max_imfs, cfg.sift_stop_tolerance, cfg.max_sift_iterations);
    // reconstruction from preserved modes: sum_{k>=k0} imf_k + residual,
    // clamped at zero to keep the map a magnitude image
    for (int m = 0; m < n_slow; ++m) {
      double acc = dec.residual[m];
      for (size_t k = static_cast<size_t>(cfg.keep_from) - 1; k < dec.imfs.size(); ++k) acc += dec.imfs[k][m];
      out.pixels(n, m) = std::max(0.0, acc);
    }
  }
  return out;
}

/// Hanning-window STFT of the range-summed map. Frequency rows ascend over
/// [-fr/2, fr/2); frame j covers samples [j*hop, j*hop + L).
inline DopplerTimeMap dtm_from_rtm(const RangeTimeMap& rtm, const RadarParams& params, const StftConfig& cfg) {
  cfg.validate(params.pri_s);
  const int n_slow = rtm.pixels.cols();
  const int win = cfg.window_samples(params.pri_s);
  const int hop = cfg.hop_samples(params.pri_s);
  if (win > n_slow) throw std::invalid_argument("dtm_from_rtm: window longer than signal");

  std::vector<double> range_sum(n_slow, 0.0);
  for (int m = 0; m < n_slow; ++m) {
    double acc = 0.0;
    for (int n = 0; n < rtm.pixels.rows(); ++n) acc += rtm.pixels(n, m);
    range_sum[m] = acc;
  }

  std::vector<double> window(win);
  for (int l = 0; l < win; ++l)
    window[l] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * l / (win - 1)));

  const int n_frames = (n_slow - win) / hop + 1;
  const int half = win / 2;  // first row holds frequency -half * fr / win
  const double fr = params.prf_hz();

  DopplerTimeMap dtm;
  dtm.pixels = RealGrid(win, n_frames);
  dtm.doppler_axis.resize(win);
  for (int q = 0; q < win; ++q) dtm.doppler_axis[q] = (q - half) * fr / win;
  dtm.time_axis.resize(n_frames);

  for (int j = 0; j < n_frames; ++j) {
    const int off = j * hop;
    dtm.time_axis[j] = (off + 0.5 * (win - 1)) * params.pri_s;
    for (int q = 0; q < win; ++q) {
      const int bin = q - half;  // cycles per window
      std::complex<double> acc{0.0, 0.0};
      for (int l = 0; l < win; ++l) {
        const double phase = -2.0 * std::numbers::pi * bin * l / win;
        acc += range_sum[off + l] * window[l] * std::polar(1.0, phase);
      }
      dtm.pixels(q, j) = std::abs(acc);
    }
  }
  return dtm;
}

/// Bilinear resize with corner alignment; exact copy when sizes match.
inline RealGrid resize_bilinear(const RealGrid& src, int target_rows, int target_cols) {
  if (target_rows < 2 || target_cols < 2) throw std::invalid_argument("resize_bilinear: target dims must be >= 2");
  if (src.rows() == target_rows && src.cols() == target_cols) return src;
  RealGrid out(target_rows, target_cols);
  const double r_scale = static_cast<double>(src.rows() - 1) / (target_rows - 1);
  const double c_scale = static_cast<double>(src.cols() - 1) / (target_cols - 1);
  for (int r = 0; r < target_rows; ++r) {
    const double sr = r * r_scale;
    const int r0 = std::min(static_cast<int>(sr), src.rows() - 1);
    const int r1 = std::min(r0 + 1, src.rows() - 1);
    const double fr = sr - r0;
    for (int c = 0; c < target_cols; ++c) {
      const double sc = c * c_scale;
      const int c0 = std::min(static_cast<int>(sc), src.cols() - 1);
      const int c1 = std::min(c0 + 1, src.cols() - 1);
      const double fc = sc - c0;
      out(r, c) = (1.0 - fr) * ((1.0 - fc) * src(r0, c0) + fc * src(r0, c1)) +
                  fr * ((1.0 - fc) * src(r1, c0) + fc * src(r1, c1));
    }
  }
  return out;
}

inline std::vector<double> resample_linear(const std::vector<double>& axis, int target) {
  if (target < 2) throw std::invalid_argument("resample_linear: target must be >= 2");
  if (static_cast<int>(axis.size()) == target) return axis;
  std::vector<double> out(target);
  const double scale = static_cast<double>(axis.size() - 1) / (target - 1);
  for (int i = 0; i < target; ++i) {
    const double s = i * scale;
    const int i0 = std::min(static_cast<int>(s), static_cast<int>(axis.size()) - 1);
    const int i1 = std::min(i0 + 1, static_cast<int>(axis.size()) - 1);
    const double f = s - i0;
    out[i] = (1.0 - f) * axis[i0] + f * axis[i1];
  }
  return out;
}

inline RangeTimeMap resize_map(const RangeTimeMap& map, int target_rows, int target_cols) {
  RangeTimeMap out;
  out.pixels = resize_bilinear(map.pixels, target_rows, target_cols);
  out.range_axis = resample_linear(map.range_axis, target_rows);
  out.time_axis = resample_linear(map.time_axis, target_cols);
  return out;
}

inline DopplerTimeMap resize_map(const DopplerTimeMap& map, int target_rows, int target_cols) {
  DopplerTimeMap out;
  out.pixels = resize_bilinear(map.pixels, target_rows, target_cols);
  out.doppler_axis = resample_linear(map.doppler_axis, target_rows);
  out.time_axis = resample_linear(map.time_axis, target_cols);
  return out;
}

}  // namespace twr
