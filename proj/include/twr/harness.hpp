#pragma once

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "twr/io.hpp"
#include "twr/pipeline.hpp"

namespace twr {

struct LabeledMap {
  int label = 0;  // 1-based class index
  RealGrid map;   // working-scale, unnormalized
};

namespace detail {

/// Seeded per-sample perturbation of a class profile: multiplicative jitter on
/// speeds, amplitudes, frequencies and RCS, additive jitter on the start range.
inline MotionProfile jitter_profile(const MotionProfile& base, double jitter, double range_jitter_m,
                                    GaussianSampler& rng) {
  MotionProfile p = base;
  const double v_scale = rng.uniform(1.0 - jitter, 1.0 + jitter);
  const double a_scale = rng.uniform(1.0 - jitter, 1.0 + jitter);
  const double f_scale = rng.uniform(1.0 - jitter, 1.0 + jitter);
  p.initial_range_m += rng.uniform(-range_jitter_m, range_jitter_m);
  p.torso_speed_m_s *= v_scale;
  p.arm_amplitude_m *= a_scale;
  p.leg_amplitude_m *= a_scale;
  p.gait_freq_hz *= f_scale;
  for (MotionSegment& s : p.segments) {
    s.speed_m_s *= v_scale;
    s.arm_amplitude_m *= a_scale;
    s.leg_amplitude_m *= a_scale;
    s.gait_freq_hz *= f_scale;
  }
  for (double& s : p.rcs) s *= rng.uniform(1.0 - jitter, 1.0 + jitter);
  return p;
}

}  // namespace detail

/// One labeled sample: jittered profile, noise variance calibrated on the
/// clean echo to the configured SNR (optionally scaled for sweeps), full
/// echo-to-map chain.
inline LabeledMap synthesize_sample(const PipelineConfig& cfg, int class_index, std::uint64_t sample_seed,
                                    double noise_variance_scale = 1.0) {
  const ClassSpec& spec = cfg.classes.at(class_index);
  GaussianSampler rng(mix_seed(sample_seed, 0x6A09E667F3BCC909ULL));
  MotionProfile profile = detail::jitter_profile(spec.profile, cfg.profile_jitter, cfg.range_jitter_m, rng);
  profile.activity_label = class_index + 1;

  const EchoMatrix clean = synthesize_echo(cfg.radar, cfg.wall, profile, NoiseModel{0.0, 0});
  NoiseModel noise;
  noise.variance = variance_for_snr_db(mean_signal_power(clean), cfg.target_snr_db) * noise_variance_scale;
  noise.rng_seed = mix_seed(sample_seed, 0xBB67AE8584CAA73BULL);
  const EchoMatrix echo = synthesize_echo(cfg.radar, cfg.wall, profile, noise);

  return LabeledMap{class_index + 1, working_map_from_echo(echo, cfg)};
}

/// Class-major labeled dataset, deterministic in (config, seed).
inline std::vector<LabeledMap> generate_dataset(const PipelineConfig& cfg, int samples_per_class,
                                                std::uint64_t seed, double noise_variance_scale = 1.0) {
  cfg.validate();
  if (samples_per_class < 1) throw std::invalid_argument("generate_dataset: samples_per_class must be >= 1");
  std::vector<LabeledMap> dataset;
  dataset.reserve(cfg.classes.size() * samples_per_class);
  for (size_t ci = 0; ci < cfg.classes.size(); ++ci)
    for (int s = 0; s < samples_per_class; ++s)
      dataset.push_back(
          synthesize_sample(cfg, static_cast<int>(ci), mix_seed(seed, ci + 1, s + 1), noise_variance_scale));
  return dataset;
}

/// Random per-class selection (without replacement) run through the full
/// corner -> ACM -> contour chain.
inline TemplateLibrary build_templates(const std::vector<LabeledMap>& dataset, int per_class,
                                       const PipelineConfig& cfg, std::uint64_t seed) {
  if (per_class < 1) throw std::invalid_argument("build_templates: per_class must be >= 1");
  const int cla = static_cast<int>(cfg.classes.size());
  std::vector<std::vector<size_t>> by_class(cla);
  for (size_t i = 0; i < dataset.size(); ++i) {
    const int cls = dataset[i].label - 1;
    if (cls < 0 || cls >= cla) throw std::invalid_argument("build_templates: label outside class list");
    by_class[cls].push_back(i);
  }

  TemplateLibrary lib;
  lib.map_type = to_string(cfg.map_type);
  lib.cover_nx = cfg.cover_nx;
  lib.cover_ny = cfg.cover_ny;
  lib.cover_overlap = cfg.cover_overlap;
  lib.templates.resize(cla);
  for (int cls = 0; cls < cla; ++cls) {
    lib.class_names.push_back(cfg.classes[cls].name);
    std::vector<size_t>& pool = by_class[cls];
    if (static_cast<int>(pool.size()) < per_class)
      throw std::invalid_argument("build_templates: class " + cfg.classes[cls].name + " has too few samples");
    std::uint64_t state = mix_seed(seed, 0x3C6EF372FE94F82BULL, cls + 1);
    for (size_t i = pool.size() - 1; i > 0; --i) {  // Fisher-Yates
      const size_t j = splitmix64(state) % (i + 1);
      std::swap(pool[i], pool[j]);
    }
    for (int i = 0; i < per_class; ++i)
      lib.templates[cls].push_back(extract_signature(dataset[pool[i]].map, cfg).cloud);
  }
  lib.validate();
  return lib;
}

struct SampleRecord {
  int index = 0;
  int true_label = 0;
  int predicted_label = 0;
  double best_sum = 0.0;
  double runner_up_sum = 0.0;
};

struct StageTimings {
  double feature_seconds = 0.0;
  double classify_seconds = 0.0;
  double total_seconds = 0.0;
};

struct EvaluationReport {
  double overall_accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  Grid<int> confusion;  // rows: true class, cols: predicted
  std::vector<SampleRecord> samples;
  StageTimings timings;
};

/// Classifies every sample against the library, accumulating the confusion
/// matrix and per-stage wall-clock.
inline EvaluationReport evaluate(const std::vector<LabeledMap>& dataset, const TemplateLibrary& lib,
                                 const PipelineConfig& cfg) {
  lib.validate();
  if (dataset.empty()) throw std::invalid_argument("evaluate: empty validation set");
  if (lib.map_type != to_string(cfg.map_type)) throw std::invalid_argument("evaluate: map type mismatch");
  if (lib.class_count() != static_cast<int>(cfg.classes.size()))
    throw std::invalid_argument("evaluate: class count mismatch");

  using clock = std::chrono::steady_clock;
  const auto t_begin = clock::now();
  auto seconds_between = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  const int cla = lib.class_count();
  EvaluationReport report;
  report.confusion = Grid<int>(cla, cla);
  std::vector<int> class_total(cla, 0), class_correct(cla, 0);

  for (size_t i = 0; i < dataset.size(); ++i) {
    const auto t0 = clock::now();
    const ExtractionResult extraction = extract_signature(dataset[i].map, cfg);
    const auto t1 = clock::now();
    const ClassificationResult cls = classify(extraction.cloud, lib);
    const auto t2 = clock::now();
    report.timings.feature_seconds += seconds_between(t0, t1);
    report.timings.classify_seconds += seconds_between(t1, t2);

    SampleRecord rec;
    rec.index = static_cast<int>(i);
    rec.true_label = dataset[i].label;
    rec.predicted_label = cls.label;
    rec.best_sum = cls.class_sums[cls.label - 1];
    double runner = 0.0;
    for (size_t c = 0; c < cls.class_sums.size(); ++c)
      if (static_cast<int>(c) != cls.label - 1) runner = std::max(runner, cls.class_sums[c]);
    rec.runner_up_sum = runner;
    report.samples.push_back(rec);

    report.confusion(rec.true_label - 1, rec.predicted_label - 1) += 1;
    class_total[rec.true_label - 1] += 1;
    if (rec.true_label == rec.predicted_label) class_correct[rec.true_label - 1] += 1;
  }

  int correct = std::accumulate(class_correct.begin(), class_correct.end(), 0);
  report.overall_accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
  report.per_class_accuracy.resize(cla, 0.0);
  for (int c = 0; c < cla; ++c)
    if (class_total[c] > 0)
      report.per_class_accuracy[c] = static_cast<double>(class_correct[c]) / class_total[c];
  report.timings.total_seconds = seconds_between(t_begin, clock::now());
  return report;
}

struct SweepRow {
  double delta_snr_db = 0.0;
  double accuracy = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  TemplateLibrary library;  // the baseline templates used throughout
};

/// Robustness sweep: templates are built once at the configured SNR; for each
/// requested drop the validation set is regenerated with the noise variance
/// scaled by 10^(-delta/10) and re-evaluated.
inline SweepResult snr_sweep(const PipelineConfig& cfg, const std::vector<double>& deltas_db) {
  cfg.validate();
  for (double d : deltas_db)
    if (d > 0.0) throw std::invalid_argument("snr_sweep: deltas must be <= 0 dB");

  SweepResult result;
  const std::vector<LabeledMap> template_set =
      generate_dataset(cfg, cfg.template_per_class, mix_seed(cfg.seed, 0x5BE0CD19137E2179ULL));
  result.library = build_templates(template_set, cfg.template_per_class, cfg, cfg.seed);

  const std::uint64_t validation_seed = mix_seed(cfg.seed, 0x9B05688C2B3E6C1FULL);
  for (double delta : deltas_db) {
    const double scale = std::pow(10.0, -delta / 10.0);
    const std::vector<LabeledMap> validation =
        generate_dataset(cfg, cfg.validation_per_class, validation_seed, scale);
    const EvaluationReport report = evaluate(validation, result.library, cfg);
    result.rows.push_back({delta, report.overall_accuracy});
  }
  return result;
}

// ---------------------------------------------------------------------------
// Report output. report.csv carries no wall-clock values so identical runs
// stay byte-identical; timings land in timings.csv.
// ---------------------------------------------------------------------------

inline void write_report_csv(const EvaluationReport& report, const std::vector<std::string>& class_names,
                             const std::string& path) {
  auto os = io::detail::open_out(path, std::ios::out);
  os << "sample,true_label,true_name,predicted_label,predicted_name,correct,best_sum,runner_up_sum\n";
  for (const SampleRecord& r : report.samples)
    os << r.index << "," << r.true_label << "," << class_names.at(r.true_label - 1) << "," << r.predicted_label
       << "," << class_names.at(r.predicted_label - 1) << "," << (r.true_label == r.predicted_label ? 1 : 0)
       << "," << io::format_double(r.best_sum) << "," << io::format_double(r.runner_up_sum) << "\n";
  os << "overall_accuracy," << io::format_double(report.overall_accuracy) << ",,,,,,\n";
}

inline void write_confusion_csv(const EvaluationReport& report, const std::vector<std::string>& class_names,
                                const std::string& path) {
  auto os = io::detail::open_out(path, std::ios::out);
  os << "true\\predicted";
  for (const std::string& name : class_names) os << "," << name;
  os << "\n";
  for (int r = 0; r < report.confusion.rows(); ++r) {
    os << class_names.at(r);
    for (int c = 0; c < report.confusion.cols(); ++c) os << "," << report.confusion(r, c);
    os << "\n";
  }
}

inline void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
  auto os = io::detail::open_out(path, std::ios::out);
  os << "delta_snr_db,accuracy\n";
  for (const SweepRow& row : sweep.rows)
    os << io::format_double(row.delta_snr_db) << "," << io::format_double(row.accuracy) << "\n";
}

inline void write_timings_csv(const StageTimings& t, const std::string& path) {
  auto os = io::detail::open_out(path, std::ios::out);
  os << "stage,seconds\n";
  os << "feature_extraction," << io::format_double(t.feature_seconds) << "\n";
  os << "classification," << io::format_double(t.classify_seconds) << "\n";
  os << "total," << io::format_double(t.total_seconds) << "\n";
}

/// Per-run provenance: command, seed, config hash and the config itself.
inline void write_run_manifest(const PipelineConfig& cfg, const std::string& command,
                               const std::vector<std::string>& outputs, const std::string& path) {
  nlohmann::json manifest;
  manifest["tool"] = "twrhar";
  manifest["version"] = "0.1.0";
  manifest["command"] = command;
  manifest["seed"] = cfg.seed;
  manifest["config_hash"] = config_hash(cfg);
  manifest["outputs"] = outputs;
  manifest["config"] = cfg;
  auto os = io::detail::open_out(path, std::ios::out);
  os << manifest.dump(2) << "\n";
}

}  // namespace twr
