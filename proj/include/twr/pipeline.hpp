#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "twr/acm_segment.hpp"
#include "twr/corner_detect.hpp"
#include "twr/echo_sim.hpp"
#include "twr/map_gen.hpp"
#include "twr/topo_match.hpp"

namespace twr {

enum class MapType { rtm, dtm };

inline std::string to_string(MapType t) { return t == MapType::rtm ? "rtm" : "dtm"; }

inline MapType map_type_from_string(const std::string& s) {
  if (s == "rtm") return MapType::rtm;
  if (s == "dtm") return MapType::dtm;
  throw std::invalid_argument("unknown map type: " + s);
}

/// One activity class: a display name plus the motion profile (with optional
/// piecewise schedule) that generates its echoes.
struct ClassSpec {
  std::string name;
  MotionProfile profile;
};

struct PipelineConfig {
  RadarParams radar;
  WallModel wall;
  double target_snr_db = 30.0;
  std::uint64_t seed = 1;
  std::vector<ClassSpec> classes;

  EmdConfig emd;
  StftConfig stft;
  double cut_threshold = 0.3;
  SiftConfig sift;
  ChanVeseConfig chan_vese;

  MapType map_type = MapType::rtm;
  int map_rows = 128, map_cols = 128;
  int cover_nx = 100, cover_ny = 100;
  double cover_overlap = 1.5;

  double profile_jitter = 0.08;      // relative jitter on speeds/amplitudes/frequencies
  double range_jitter_m = 0.15;      // absolute jitter on the initial range
  int template_per_class = 5;
  int validation_per_class = 20;

  void validate() const {
    radar.validate();
    wall.validate();
    emd.validate();
    stft.validate(radar.pri_s);
    sift.validate();
    chan_vese.validate();
    if (classes.empty()) throw std::invalid_argument("PipelineConfig: no activity classes");
    for (const ClassSpec& c : classes) c.profile.validate();
    if (cut_threshold <= 0.0 || cut_threshold >= 1.0)
      throw std::invalid_argument("PipelineConfig: cut_threshold must be in (0, 1)");
    if (map_rows < 16 || map_cols < 16) throw std::invalid_argument("PipelineConfig: working map too small");
    if (cover_nx < 2 || cover_ny < 2 || cover_overlap <= 1.0)
      throw std::invalid_argument("PipelineConfig: bad cover parameters");
    if (template_per_class < 1 || validation_per_class < 1)
      throw std::invalid_argument("PipelineConfig: sample counts must be >= 1");
    if (profile_jitter < 0.0 || profile_jitter >= 1.0)
      throw std::invalid_argument("PipelineConfig: jitter must be in [0, 1)");
  }
};

// ---------------------------------------------------------------------------
// Default desk-scale configuration. The twelve activities follow the paper's
// scene list; walking uses the swing kinematics directly and the others are
// piecewise speed/amplitude/frequency schedules stored here as data.
// ---------------------------------------------------------------------------

namespace detail {

inline MotionProfile base_profile(double r0) {
  MotionProfile p;
  p.initial_range_m = r0;
  p.duration_s = 3.0;
  p.range_window_min_m = 0.3;
  p.range_window_max_m = 7.0;
  return p;
}

inline MotionSegment seg(double t0, double t1, double v, double arm, double leg, double f) {
  return MotionSegment{t0, t1, v, arm, leg, f};
}

}  // namespace detail

inline std::vector<ClassSpec> default_activity_classes() {
  using detail::base_profile;
  using detail::seg;
  std::vector<ClassSpec> classes;

  {  // S1: empty scene, wall and noise only
    MotionProfile p = base_profile(2.0);
    p.rcs = {0, 0, 0, 0, 0, 0};
    classes.push_back({"S1_Empty", p});
  }
  {  // S2: punching, fast arm swings in place
    MotionProfile p = base_profile(2.0);
    p.segments = {seg(0.0, 3.0, 0.05, 0.45, 0.05, 2.0)};
    classes.push_back({"S2_Punching", p});
  }
  {  // S3: kicking, leg-dominated swings
    MotionProfile p = base_profile(2.0);
    p.segments = {seg(0.0, 3.0, 0.05, 0.05, 0.5, 1.6)};
    classes.push_back({"S3_Kicking", p});
  }
  {  // S4: grabbing, one slow arm reach
    MotionProfile p = base_profile(1.8);
    p.segments = {seg(0.0, 3.0, 0.02, 0.35, 0.02, 0.5)};
    classes.push_back({"S4_Grabbing", p});
  }
  {  // S5: sitting down, short torso shift then still
    MotionProfile p = base_profile(2.2);
    p.segments = {seg(0.0, 1.2, 0.35, 0.12, 0.1, 0.9), seg(1.2, 3.0, 0.0, 0.03, 0.02, 0.4)};
    classes.push_back({"S5_SittingDown", p});
  }
  {  // S6: standing up, mirrored torso shift
    MotionProfile p = base_profile(2.6);
    p.segments = {seg(0.0, 1.2, -0.35, 0.12, 0.1, 0.9), seg(1.2, 3.0, 0.0, 0.03, 0.02, 0.4)};
    classes.push_back({"S6_StandingUp", p});
  }
  {  // S7: rotating in place, moderate whole-body modulation
    MotionProfile p = base_profile(2.0);
    p.segments = {seg(0.0, 3.0, 0.0, 0.2, 0.2, 0.8)};
    classes.push_back({"S7_Rotating", p});
  }
  {  // S8: walking
    MotionProfile p = base_profile(1.2);
    p.torso_speed_m_s = 0.8;
    p.arm_amplitude_m = 0.3;
    p.leg_amplitude_m = 0.45;
    p.gait_freq_hz = 1.8;
    classes.push_back({"S8_Walking", p});
  }
  {  // S9: sitting to walking
    MotionProfile p = base_profile(1.4);
    p.segments = {seg(0.0, 1.5, 0.0, 0.03, 0.02, 0.5), seg(1.5, 3.0, 0.8, 0.3, 0.45, 1.8)};
    classes.push_back({"S9_SittingToWalking", p});
  }
  {  // S10: walking to sitting
    MotionProfile p = base_profile(1.2);
    p.segments = {seg(0.0, 1.5, 0.8, 0.3, 0.45, 1.8), seg(1.5, 3.0, 0.0, 0.03, 0.02, 0.5)};
    classes.push_back({"S10_WalkingToSitting", p});
  }
  {  // S11: falling to walking, fast range jump then gait
    MotionProfile p = base_profile(1.1);
    p.segments = {seg(0.0, 0.5, 1.8, 0.1, 0.6, 3.0), seg(0.5, 3.0, 0.8, 0.3, 0.45, 1.8)};
    classes.push_back({"S11_FallingToWalking", p});
  }
  {  // S12: walking to falling
    MotionProfile p = base_profile(1.2);
    p.segments = {seg(0.0, 2.5, 0.8, 0.3, 0.45, 1.8), seg(2.5, 3.0, 1.8, 0.1, 0.6, 3.0)};
    classes.push_back({"S12_WalkingToFalling", p});
  }
  return classes;
}

inline PipelineConfig default_pipeline_config() {
  PipelineConfig cfg;
  cfg.classes = default_activity_classes();
  cfg.wall.wall_rcs = 5.0;
  cfg.chan_vese.seed_radius1 = 32.0;
  cfg.chan_vese.seed_radius2 = 32.0;
  return cfg;
}

/// Paper-scale preset: 1024x1024 echoes over 4 s, 256x256 working maps, the
/// Table-style disk radii, fewer alternation rounds.
inline PipelineConfig paper_scale_config() {
  PipelineConfig cfg = default_pipeline_config();
  cfg.radar.fast_samples = 1024;
  cfg.radar.slow_samples = 1024;
  cfg.radar.pri_s = 1.0 / 256.0;
  cfg.radar.pulse_width_s = 1.0 / 256.0;
  cfg.radar.fast_sample_interval_s = 2.0e-10 * 256.0 / 1024.0;  // keep ~7.7 m unambiguous span
  cfg.map_rows = 256;
  cfg.map_cols = 256;
  cfg.chan_vese.seed_radius1 = 64.0;
  cfg.chan_vese.seed_radius2 = 64.0;
  cfg.chan_vese.max_alternations = 20;
  cfg.template_per_class = 20;
  cfg.validation_per_class = 60;
  for (ClassSpec& c : cfg.classes) {
    c.profile.duration_s = 4.0;
    if (!c.profile.segments.empty()) c.profile.segments.back().t_end = 4.0;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// JSON bindings
// ---------------------------------------------------------------------------

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RadarParams, carrier_freq_hz, bandwidth_hz, pulse_width_s,
                                                pri_s, fast_sample_interval_s, fast_samples, slow_samples,
                                                speed_of_light_m_s)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(WallModel, thickness_m, rel_permittivity,
                                                amplitude_attenuation, wall_rcs)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MotionSegment, t_start, t_end, speed_m_s, arm_amplitude_m,
                                                leg_amplitude_m, gait_freq_hz)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MotionProfile, activity_label, torso_speed_m_s,
                                                initial_range_m, arm_amplitude_m, leg_amplitude_m,
                                                gait_freq_hz, head_offset_m, hand_offset_m, foot_offset_m,
                                                rcs, duration_s, range_window_min_m, range_window_max_m,
                                                segments)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ClassSpec, name, profile)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EmdConfig, max_imfs, keep_from, sift_stop_tolerance,
                                                max_sift_iterations)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(StftConfig, window_len_s, hop_s)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SiftConfig, base_sigma, levels_per_octave, octave_count,
                                                contrast_threshold, hessian_edge_ratio_max, max_corners)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ChanVeseConfig, lambda_pp, lambda_pm, lambda_mp, lambda_mm,
                                                mu1, mu2, heaviside_eps, time_step, seed_radius1,
                                                seed_radius2, max_alternations, gradient_steps_cap,
                                                stop_threshold, curvature_denominator_floor)

inline void to_json(nlohmann::json& j, const MapType& t) { j = to_string(t); }
inline void from_json(const nlohmann::json& j, MapType& t) { t = map_type_from_string(j.get<std::string>()); }

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PipelineConfig, radar, wall, target_snr_db, seed, classes,
                                                emd, stft, cut_threshold, sift, chan_vese, map_type,
                                                map_rows, map_cols, cover_nx, cover_ny, cover_overlap,
                                                profile_jitter, range_jitter_m, template_per_class,
                                                validation_per_class)

/// FNV-1a over the canonical JSON dump; stable across runs of the same build.
inline std::uint64_t config_hash(const PipelineConfig& cfg) {
  const std::string dump = nlohmann::json(cfg).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char ch : dump) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Echo -> working map -> signature extraction
// ---------------------------------------------------------------------------

/// Full map chain: MTI, magnitude, per-bin EMD denoise, optional STFT, resize
/// to the working scale. Pixels are left unnormalized.
inline RealGrid working_map_from_echo(const EchoMatrix& echo, const PipelineConfig& cfg) {
  const EchoMatrix mti = mti_filter(echo);
  RangeTimeMap rtm = rtm_from_echo(mti);
  rtm = emd_denoise(rtm, cfg.emd);
  if (cfg.map_type == MapType::dtm) {
    const DopplerTimeMap dtm = dtm_from_rtm(rtm, echo.params, cfg.stft);
    return resize_bilinear(dtm.pixels, cfg.map_rows, cfg.map_cols);
  }
  return resize_bilinear(rtm.pixels, cfg.map_rows, cfg.map_cols);
}

struct ExtractionResult {
  SeedPoints seeds;
  bool seed_fallback = false;
  SegmentationResult segmentation;
  PointCloud cloud;
};

/// Corner-seeded Chan-Vese extraction with the documented fallbacks: empty or
/// cornerless scenes seed at image center / origin, and a contourless phi1
/// degrades to a single point at the foreground seed.
inline ExtractionResult extract_signature(const RealGrid& working_map, const PipelineConfig& cfg) {
  const RealGrid normalized = normalize_unit(working_map);
  ExtractionResult out;
  try {
    const BinaryMap binary = threshold_truncate(normalized, cfg.cut_threshold);
    const CornerSet corners = detect_corners(binary, cfg.sift);
    out.seeds = seed_points(corners, normalized.rows(), normalized.cols());
  } catch (const std::runtime_error&) {  // "empty scene" or "no corners"
    out.seed_fallback = true;
    out.seeds.near_n = normalized.rows() / 2;
    out.seeds.near_m = normalized.cols() / 2;
    out.seeds.far_n = 0;
    out.seeds.far_m = 0;
    out.seeds.centroid_n = out.seeds.near_n;
    out.seeds.centroid_m = out.seeds.near_m;
  }
  out.segmentation = evolve(normalized, out.seeds, cfg.chan_vese);
  try {
    out.cloud = contour_pointcloud(out.segmentation.level_sets.phi1);
  } catch (const std::runtime_error&) {  // contour vanished
    out.cloud.points.push_back({static_cast<double>(out.seeds.near_m), static_cast<double>(out.seeds.near_n)});
  }
  return out;
}

}  // namespace twr
