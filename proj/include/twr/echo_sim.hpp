#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "twr/grid.hpp"

namespace twr {

// ---------------------------------------------------------------------------
// Deterministic RNG. Seeding is explicit everywhere; equal seeds reproduce
// bit-identical streams independent of the standard library.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Mixes a base seed with stream identifiers into an independent sub-seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = seed ^ (a * 0xD1B54A32D192ED03ULL) ^ (b * 0x8CB92BA72F3D8DD7ULL);
  return splitmix64(s);
}

/// Box-Muller Gaussian sampler over a splitmix64 stream.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : state_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1], u2 in [0,1)
    const double u1 = (static_cast<double>(splitmix64(state_) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform draw in [lo, hi).
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Scene description
// ---------------------------------------------------------------------------

struct RadarParams {
  double carrier_freq_hz = 1.5e9;
  double bandwidth_hz = 2.0e9;
  double pulse_width_s = 1.0 / 64.0;
  double pri_s = 1.0 / 64.0;
  double fast_sample_interval_s = 2.0e-10;
  int fast_samples = 256;
  int slow_samples = 192;
  double speed_of_light_m_s = 299792458.0;

  double chirp_slope() const { return bandwidth_hz / pulse_width_s; }
  double prf_hz() const { return 1.0 / pri_s; }
  double range_bin_m() const { return speed_of_light_m_s * fast_sample_interval_s / 2.0; }
  double duration_s() const { return slow_samples * pri_s; }

  void validate() const {
    if (bandwidth_hz <= 0.0) throw std::invalid_argument("RadarParams: bandwidth must be positive");
    if (pulse_width_s <= 0.0) throw std::invalid_argument("RadarParams: pulse width must be positive");
    if (pri_s <= 0.0) throw std::invalid_argument("RadarParams: PRI must be positive");
    if (fast_sample_interval_s <= 0.0) throw std::invalid_argument("RadarParams: sample interval must be positive");
    if (fast_samples < 2 || slow_samples < 2) throw std::invalid_argument("RadarParams: need at least 2x2 samples");
    if (range_bin_m() <= 0.0) throw std::invalid_argument("RadarParams: degenerate range cell");
  }
};

struct WallModel {
  double thickness_m = 0.12;
  double rel_permittivity = 6.0;
  double amplitude_attenuation = 0.7;  // alpha_w in (0, 1]
  double wall_rcs = 0.0;

  void validate() const {
    if (rel_permittivity < 1.0) throw std::invalid_argument("WallModel: relative permittivity must be >= 1");
    if (amplitude_attenuation <= 0.0 || amplitude_attenuation > 1.0)
      throw std::invalid_argument("WallModel: attenuation must be in (0, 1]");
    if (thickness_m < 0.0) throw std::invalid_argument("WallModel: negative thickness");
    if (wall_rcs < 0.0) throw std::invalid_argument("WallModel: negative RCS");
  }
};

/// One homogeneous stretch of motion. Within a segment the torso speed, limb
/// amplitudes and gait frequency are constant; torso position and gait phase
/// accumulate continuously across segment boundaries.
struct MotionSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double speed_m_s = 0.0;
  double arm_amplitude_m = 0.0;
  double leg_amplitude_m = 0.0;
  double gait_freq_hz = 0.0;
};

struct MotionProfile {
  int activity_label = 0;  // 1-based class id
  double torso_speed_m_s = 0.0;
  double initial_range_m = 2.0;
  double arm_amplitude_m = 0.0;
  double leg_amplitude_m = 0.0;
  double gait_freq_hz = 1.0;
  double head_offset_m = 0.05;   // dR1
  double hand_offset_m = 0.2;    // dR3
  double foot_offset_m = 0.3;    // dR5
  std::array<double, 6> rcs{0.8, 1.5, 0.5, 0.5, 0.6, 0.6};
  double duration_s = 3.0;
  double range_window_min_m = 0.2;
  double range_window_max_m = 8.0;
  /// Optional piecewise schedule; when empty the base fields above apply over
  /// the whole duration.
  std::vector<MotionSegment> segments;

  void validate() const {
    if (duration_s <= 0.0) throw std::invalid_argument("MotionProfile: duration must be positive");
    for (double s : rcs)
      if (s < 0.0) throw std::invalid_argument("MotionProfile: negative RCS");
    if (range_window_min_m <= 0.0 || range_window_max_m <= range_window_min_m)
      throw std::invalid_argument("MotionProfile: bad range window");
    double prev_end = 0.0;
    for (const MotionSegment& seg : segments) {
      if (seg.t_end <= seg.t_start) throw std::invalid_argument("MotionProfile: empty segment");
      if (seg.t_start < prev_end - 1e-12) throw std::invalid_argument("MotionProfile: overlapping segments");
      prev_end = seg.t_end;
    }
  }
};

struct NoiseModel {
  double variance = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (variance < 0.0) throw std::invalid_argument("NoiseModel: negative variance");
  }
};

struct EchoMatrix {
  ComplexGrid data;  // fast_samples x slow_samples
  RadarParams params;
};

// ---------------------------------------------------------------------------
// Kinematics and synthesis
// ---------------------------------------------------------------------------

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

/// Extra two-way refraction delay introduced by the wall.
inline double wall_delay(const WallModel& wall, const RadarParams& params) {
  return 2.0 * wall.thickness_m * (std::sqrt(wall.rel_permittivity) - 1.0) / params.speed_of_light_m_s;
}

namespace detail {

struct MotionState {
  double torso_range;     // R0 + accumulated travel
  double gait_phase;      // 2*pi * integral of gait frequency
  double arm_amplitude;
  double leg_amplitude;
};

inline MotionState motion_state_at(const MotionProfile& p, double t) {
  if (p.segments.empty()) {
    return {p.initial_range_m + p.torso_speed_m_s * t,
            2.0 * std::numbers::pi * p.gait_freq_hz * t,
            p.arm_amplitude_m, p.leg_amplitude_m};
  }
  MotionState st{p.initial_range_m, 0.0, p.arm_amplitude_m, p.leg_amplitude_m};
  for (const MotionSegment& seg : p.segments) {
    if (t <= seg.t_start) break;
    const double dt = std::min(t, seg.t_end) - seg.t_start;
    st.torso_range += seg.speed_m_s * dt;
    st.gait_phase += 2.0 * std::numbers::pi * seg.gait_freq_hz * dt;
    if (t <= seg.t_end) {
      st.arm_amplitude = seg.arm_amplitude_m;
      st.leg_amplitude = seg.leg_amplitude_m;
      return st;
    }
    st.arm_amplitude = seg.arm_amplitude_m;
    st.leg_amplitude = seg.leg_amplitude_m;
  }
  return st;
}

}  // namespace detail

/// Ranges of the six scattering centers (head, torso, hands, feet) at time t.
/// Arms and legs swing in antiphase about the torso track.
inline std::array<double, 6> scatterer_ranges(const MotionProfile& profile, double t) {
  if (t < 0.0 || t > profile.duration_s)
    throw std::out_of_range("scatterer_ranges: t outside motion duration");
  const detail::MotionState st = detail::motion_state_at(profile, t);
  const double swing = std::sin(st.gait_phase);
  const double arm = st.arm_amplitude * swing;
  const double leg = st.leg_amplitude * swing;
  return {
      st.torso_range + profile.head_offset_m,
      st.torso_range,
      st.torso_range + arm + profile.hand_offset_m,
      st.torso_range - arm + profile.hand_offset_m,  // sin(phase - pi) = -sin(phase)
      st.torso_range + leg + profile.foot_offset_m,
      st.torso_range - leg + profile.foot_offset_m,
  };
}

/// Pulse-compressed echo of the six-scatterer human, the wall return and
/// complex white Gaussian noise, on the fast x slow time grid.
inline EchoMatrix synthesize_echo(const RadarParams& params, const WallModel& wall,
                                  const MotionProfile& profile, const NoiseModel& noise) {
  params.validate();
  wall.validate();
  profile.validate();
  noise.validate();

  const int n_fast = params.fast_samples;
  const int n_slow = params.slow_samples;
  const double ts = params.fast_sample_interval_s;
  const double c = params.speed_of_light_m_s;
  const double tau_w = wall_delay(wall, params);
  const double two_pi_fc = 2.0 * std::numbers::pi * params.carrier_freq_hz;
  const double amp_scale = params.pulse_width_s;

  EchoMatrix echo;
  echo.params = params;
  echo.data = ComplexGrid(n_fast, n_slow);

  bool any_scatterer = false;
  for (double s : profile.rcs) any_scatterer |= (s > 0.0);

  for (int m = 0; m < n_slow; ++m) {
    const double tm = m * params.pri_s;

    std::array<double, 6> tau{};
    if (any_scatterer) {
      const std::array<double, 6> ranges = scatterer_ranges(profile, tm);
      for (int i = 0; i < 6; ++i) {
        if (profile.rcs[i] > 0.0 &&
            (ranges[i] < profile.range_window_min_m || ranges[i] > profile.range_window_max_m))
          throw std::domain_error("synthesize_echo: scatterer range left the configured window");
        tau[i] = 2.0 * ranges[i] / c + tau_w;
      }
    }

    for (int n = 0; n < n_fast; ++n) {
      const double tn = n * ts;
      std::complex<double> acc{0.0, 0.0};
      if (any_scatterer) {
        for (int i = 0; i < 6; ++i) {
          if (profile.rcs[i] <= 0.0) continue;
          const double dt = tn - tau[i];
          const double a = profile.rcs[i] * wall.amplitude_attenuation * amp_scale *
                           sinc(params.bandwidth_hz * dt);
          acc += std::polar(a, two_pi_fc * dt);
        }
      }
      if (wall.wall_rcs > 0.0) {
        const double dt = tn - tau_w;
        acc += std::polar(wall.wall_rcs * amp_scale * sinc(params.bandwidth_hz * dt), two_pi_fc * dt);
      }
      echo.data(n, m) = acc;
    }
  }

  if (noise.variance > 0.0) {
    GaussianSampler gauss(noise.rng_seed);
    const double sigma = std::sqrt(noise.variance / 2.0);
    for (int n = 0; n < n_fast; ++n)
      for (int m = 0; m < n_slow; ++m)
        echo.data(n, m) += std::complex<double>(sigma * gauss.next(), sigma * gauss.next());
  }

  if (!all_finite(echo.data)) throw std::domain_error("synthesize_echo: non-finite echo (bad parameters)");
  return echo;
}

/// Mean |y|^2 over the matrix; used with the noise-free echo to define SNR.
inline double mean_signal_power(const EchoMatrix& echo) {
  double acc = 0.0;
  for (const std::complex<double>& v : echo.data.raw()) acc += std::norm(v);
  return echo.data.size() > 0 ? acc / static_cast<double>(echo.data.size()) : 0.0;
}

/// Noise variance realizing the requested SNR (dB) against a clean power.
inline double variance_for_snr_db(double clean_power, double snr_db) {
  if (clean_power <= 0.0) return 0.0;
  return clean_power / std::pow(10.0, snr_db / 10.0);
}

}  // namespace twr
