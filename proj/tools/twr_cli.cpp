// Command-line driver for the through-the-wall HAR pipeline: scene synthesis,
// map generation, template building, classification, evaluation, SNR sweeps
// and debug rendering. All parameters come from one JSON config plus flag
// overrides; every run writes a manifest for reproducibility.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twr/harness.hpp"

namespace fs = std::filesystem;
using namespace twr;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string scale = "desk";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> map_type;
  std::optional<double> snr_db;
};

PipelineConfig load_config(const GlobalOptions& opts) {
  PipelineConfig base = opts.scale == "paper" ? paper_scale_config() : default_pipeline_config();
  nlohmann::json merged = base;
  if (!opts.config_path.empty()) {
    std::ifstream is(opts.config_path);
    if (!is) throw std::runtime_error("cannot open config: " + opts.config_path);
    merged.merge_patch(nlohmann::json::parse(is));
  }
  PipelineConfig cfg = merged.get<PipelineConfig>();
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.map_type) cfg.map_type = map_type_from_string(*opts.map_type);
  if (opts.snr_db) cfg.target_snr_db = *opts.snr_db;
  cfg.validate();
  return cfg;
}

int class_index_by_name(const PipelineConfig& cfg, const std::string& name) {
  for (size_t i = 0; i < cfg.classes.size(); ++i)
    if (cfg.classes[i].name == name) return static_cast<int>(i);
  // also accept a plain 1-based index
  try {
    const int idx = std::stoi(name);
    if (idx >= 1 && idx <= static_cast<int>(cfg.classes.size())) return idx - 1;
  } catch (...) {
  }
  throw std::runtime_error("unknown activity: " + name);
}

std::vector<std::string> class_names(const PipelineConfig& cfg) {
  std::vector<std::string> names;
  for (const ClassSpec& c : cfg.classes) names.push_back(c.name);
  return names;
}

void draw_cross(RealGrid& img, int n, int m, double value) {
  for (int d = -3; d <= 3; ++d) {
    const int rn = n + d, cm = m + d;
    if (rn >= 0 && rn < img.rows()) img(rn, m) = value;
    if (cm >= 0 && cm < img.cols()) img(n, cm) = value;
  }
}

int cmd_simulate(const PipelineConfig& cfg, const std::string& activity, const std::string& out_path) {
  const int ci = class_index_by_name(cfg, activity);
  const std::uint64_t sample_seed = mix_seed(cfg.seed, ci + 1, 1);
  MotionProfile profile = cfg.classes[ci].profile;
  profile.activity_label = ci + 1;
  const EchoMatrix clean = synthesize_echo(cfg.radar, cfg.wall, profile, NoiseModel{0.0, 0});
  NoiseModel noise;
  noise.variance = variance_for_snr_db(mean_signal_power(clean), cfg.target_snr_db);
  noise.rng_seed = mix_seed(sample_seed, 0xBB67AE8584CAA73BULL);
  const EchoMatrix echo = synthesize_echo(cfg.radar, cfg.wall, profile, noise);
  io::write_echo(echo, out_path);
  write_run_manifest(cfg, "simulate " + activity, {out_path},
                     (fs::path(out_path).parent_path() / "manifest.json").string());
  std::cout << "wrote " << out_path << " (" << echo.data.rows() << "x" << echo.data.cols() << ")\n";
  return 0;
}

int cmd_maps(const PipelineConfig& cfg, const std::string& in_path, const std::string& out_dir) {
  fs::create_directories(out_dir);
  EchoMatrix echo;
  echo.data = io::read_echo(in_path);
  echo.params = cfg.radar;
  if (echo.data.rows() != cfg.radar.fast_samples || echo.data.cols() != cfg.radar.slow_samples)
    throw std::runtime_error("echo dimensions do not match the configured radar parameters");

  const EchoMatrix mti = mti_filter(echo);
  RangeTimeMap rtm = rtm_from_echo(mti);
  rtm = emd_denoise(rtm, cfg.emd);
  const DopplerTimeMap dtm = dtm_from_rtm(rtm, cfg.radar, cfg.stft);

  const fs::path dir(out_dir);
  io::write_float_raster(rtm.pixels, (dir / "rtm.f32").string());
  io::write_pgm(rtm.pixels, (dir / "rtm.pgm").string());
  io::write_axis_csv(rtm.range_axis, "range_m", (dir / "rtm_range_axis.csv").string());
  io::write_axis_csv(rtm.time_axis, "time_s", (dir / "rtm_time_axis.csv").string());
  io::write_float_raster(dtm.pixels, (dir / "dtm.f32").string());
  io::write_pgm(dtm.pixels, (dir / "dtm.pgm").string());
  io::write_axis_csv(dtm.doppler_axis, "doppler_hz", (dir / "dtm_doppler_axis.csv").string());
  io::write_axis_csv(dtm.time_axis, "time_s", (dir / "dtm_time_axis.csv").string());

  const RealGrid working = cfg.map_type == MapType::dtm
                               ? resize_bilinear(dtm.pixels, cfg.map_rows, cfg.map_cols)
                               : resize_bilinear(rtm.pixels, cfg.map_rows, cfg.map_cols);
  io::write_float_raster(working, (dir / "working.f32").string());
  io::write_pgm(working, (dir / "working.pgm").string());
  write_run_manifest(cfg, "maps " + in_path, {out_dir}, (dir / "manifest.json").string());
  std::cout << "wrote maps to " << out_dir << "\n";
  return 0;
}

int cmd_templates(const PipelineConfig& cfg, int per_class, const std::string& out_dir) {
  const int count = per_class > 0 ? per_class : cfg.template_per_class;
  const auto dataset = generate_dataset(cfg, count, mix_seed(cfg.seed, 0x5BE0CD19137E2179ULL));
  const TemplateLibrary lib = build_templates(dataset, count, cfg, cfg.seed);
  io::save_template_library(lib, out_dir);
  write_run_manifest(cfg, "templates", {out_dir}, (fs::path(out_dir) / "run_manifest.json").string());
  std::cout << "built " << lib.class_count() * count << " templates in " << out_dir << "\n";
  return 0;
}

int cmd_classify(const PipelineConfig& cfg, const std::string& in_path, const std::string& library_dir,
                 const std::string& scores_path) {
  const TemplateLibrary lib = io::load_template_library(library_dir);
  if (lib.map_type != to_string(cfg.map_type))
    throw std::runtime_error("library map type (" + lib.map_type + ") does not match the configured map type");
  const RealGrid map = io::read_float_raster(in_path);
  const ExtractionResult extraction = extract_signature(map, cfg);
  const ClassificationResult result = classify(extraction.cloud, lib);
  std::cout << "label: " << result.label << " (" << lib.class_names.at(result.label - 1) << ")\n";
  for (size_t cls = 0; cls < result.class_sums.size(); ++cls)
    std::cout << "  " << lib.class_names[cls] << " sum=" << result.class_sums[cls] << "\n";
  if (!scores_path.empty()) {
    auto os = io::detail::open_out(scores_path, std::ios::out);
    os << "class,template,similarity\n";
    for (size_t cls = 0; cls < result.score_table.size(); ++cls)
      for (size_t i = 0; i < result.score_table[cls].size(); ++i)
        os << lib.class_names[cls] << "," << i << "," << io::format_double(result.score_table[cls][i]) << "\n";
  }
  return 0;
}

int cmd_evaluate(const PipelineConfig& cfg, const std::string& library_dir, int samples,
                 const std::string& out_dir) {
  fs::create_directories(out_dir);
  const TemplateLibrary lib = io::load_template_library(library_dir);
  const int count = samples > 0 ? samples : cfg.validation_per_class;
  const auto validation = generate_dataset(cfg, count, mix_seed(cfg.seed, 0x9B05688C2B3E6C1FULL));
  const EvaluationReport report = evaluate(validation, lib, cfg);

  const fs::path dir(out_dir);
  const auto names = class_names(cfg);
  write_report_csv(report, names, (dir / "report.csv").string());
  write_confusion_csv(report, names, (dir / "confusion.csv").string());
  write_timings_csv(report.timings, (dir / "timings.csv").string());
  write_run_manifest(cfg, "evaluate", {(dir / "report.csv").string(), (dir / "confusion.csv").string()},
                     (dir / "manifest.json").string());
  std::cout << "accuracy: " << report.overall_accuracy << " over " << validation.size() << " samples\n";
  return 0;
}

int cmd_sweep(const PipelineConfig& cfg, const std::string& deltas_arg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<double> deltas;
  std::stringstream ss(deltas_arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) deltas.push_back(std::stod(tok));
  const SweepResult sweep = snr_sweep(cfg, deltas);
  const fs::path dir(out_dir);
  write_sweep_csv(sweep, (dir / "sweep.csv").string());
  write_run_manifest(cfg, "sweep " + deltas_arg, {(dir / "sweep.csv").string()},
                     (dir / "manifest.json").string());
  for (const SweepRow& row : sweep.rows)
    std::cout << "dSNR " << row.delta_snr_db << " dB -> accuracy " << row.accuracy << "\n";
  return 0;
}

/// Zero-contour overlay: brightens pixels where phi changes sign.
RealGrid contour_overlay_of(const RealGrid& base, const RealGrid& phi) {
  RealGrid overlay = base;
  for (int r = 0; r + 1 < phi.rows(); ++r)
    for (int c = 0; c + 1 < phi.cols(); ++c) {
      const bool s = phi(r, c) >= 0.0;
      if ((phi(r + 1, c) >= 0.0) != s || (phi(r, c + 1) >= 0.0) != s) overlay(r, c) = 1.0;
    }
  return overlay;
}

int cmd_render(const PipelineConfig& cfg, const std::string& in_path, const std::string& out_dir,
               int checkpoint_every) {
  fs::create_directories(out_dir);
  const RealGrid map = io::read_float_raster(in_path);
  const RealGrid normalized = normalize_unit(map);
  const fs::path dir(out_dir);
  io::write_pgm(normalized, (dir / "map.pgm").string());

  const ExtractionResult extraction = extract_signature(map, cfg);

  // corners and seeds over the map
  RealGrid overlay = normalized;
  std::ofstream corners_csv((dir / "corners.csv").string());
  corners_csv << "n,m,response\n";
  try {
    const BinaryMap binary = threshold_truncate(normalized, cfg.cut_threshold);
    RealGrid bin_img(binary.pixels.rows(), binary.pixels.cols());
    for (size_t i = 0; i < bin_img.size(); ++i) bin_img[i] = binary.pixels[i];
    io::write_pgm(bin_img, (dir / "binary.pgm").string());
    const CornerSet corners = detect_corners(binary, cfg.sift);
    for (const Corner& c : corners.points) {
      draw_cross(overlay, c.n, c.m, 1.0);
      corners_csv << c.n << "," << c.m << "," << io::format_double(c.response) << "\n";
    }
  } catch (const std::runtime_error&) {
    // empty scene: overlay carries the fallback seeds only
  }
  draw_cross(overlay, extraction.seeds.near_n, extraction.seeds.near_m, 1.0);
  draw_cross(overlay, extraction.seeds.far_n, extraction.seeds.far_m, 1.0);
  io::write_pgm(overlay, (dir / "corners_overlay.pgm").string());

  std::ofstream seeds_csv((dir / "seeds.csv").string());
  seeds_csv << "kind,n,m\n";
  seeds_csv << "near," << extraction.seeds.near_n << "," << extraction.seeds.near_m << "\n";
  seeds_csv << "far," << extraction.seeds.far_n << "," << extraction.seeds.far_m << "\n";
  seeds_csv << "centroid," << io::format_double(extraction.seeds.centroid_n) << ","
            << io::format_double(extraction.seeds.centroid_m) << "\n";

  // level sets, zero-contour overlay, masks, cloud
  io::write_float_raster(extraction.segmentation.level_sets.phi1, (dir / "phi1.f32").string());
  io::write_float_raster(extraction.segmentation.level_sets.phi2, (dir / "phi2.f32").string());
  io::write_pgm(contour_overlay_of(normalized, extraction.segmentation.level_sets.phi1),
                (dir / "contour_overlay.pgm").string());
  io::write_pbm(extraction.segmentation.feature_mask(), (dir / "feature_mask.pbm").string());
  io::write_pointcloud_csv(extraction.cloud, (dir / "cloud.csv").string());

  // optional evolution checkpoints: phi snapshots every N alternation rounds
  if (checkpoint_every > 0) {
    LevelSetPair pair = init_level_sets(extraction.seeds, cfg.chan_vese, normalized.rows(), normalized.cols());
    double image_mean = 0.0;
    for (const double v : normalized.raw()) image_mean += v;
    image_mean /= static_cast<double>(normalized.size());
    RegionMeans means{image_mean, image_mean, image_mean, image_mean};
    const int rounds = std::min(cfg.chan_vese.max_alternations, cfg.chan_vese.gradient_steps_cap);
    for (int k = 1; k <= rounds; ++k) {
      means = update_region_means(normalized, pair, cfg.chan_vese.heaviside_eps, means);
      pair = level_set_step(normalized, pair, means, cfg.chan_vese);
      if (k % checkpoint_every == 0 || k == rounds) {
        std::ostringstream tag;
        tag << "checkpoint_" << std::setw(3) << std::setfill('0') << k;
        io::write_float_raster(pair.phi1, (dir / (tag.str() + "_phi1.f32")).string());
        io::write_float_raster(pair.phi2, (dir / (tag.str() + "_phi2.f32")).string());
        io::write_pgm(contour_overlay_of(normalized, pair.phi1), (dir / (tag.str() + "_contour.pgm")).string());
      }
    }
  }
  write_run_manifest(cfg, "render " + in_path, {out_dir}, (dir / "manifest.json").string());
  std::cout << "wrote render products to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"through-the-wall radar human activity recognition pipeline"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  GlobalOptions globals;
  std::uint64_t seed_value = 0;
  std::string map_value, dump_path;
  double snr_value = 0.0;
  app.add_option("--config", globals.config_path, "JSON pipeline configuration");
  app.add_option("--scale", globals.scale, "preset: desk (default) or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  auto* seed_opt = app.add_option("--seed", seed_value, "override the run seed");
  auto* map_opt = app.add_option("--map", map_value, "override map type: rtm or dtm")
                      ->check(CLI::IsMember({"rtm", "dtm"}));
  auto* snr_opt = app.add_option("--snr-db", snr_value, "override the target SNR in dB");
  auto* dump_opt = app.add_option("--dump-config", dump_path, "write the effective config JSON and exit");

  std::string activity = "S8_Walking", in_path, out_path, out_dir, library_dir, scores_path, deltas = "0";
  int per_class = 0, samples = 0;

  CLI::App* sim = app.add_subcommand("simulate", "synthesize one labeled echo to a binary file");
  sim->add_option("--activity", activity, "class name or 1-based index");
  sim->add_option("--out", out_path, "output echo file")->required();

  CLI::App* maps = app.add_subcommand("maps", "turn an echo file into RTM/DTM rasters");
  maps->add_option("--in", in_path, "input echo file")->required();
  maps->add_option("--out-dir", out_dir, "output directory")->required();

  CLI::App* templates = app.add_subcommand("templates", "build and persist a template library");
  templates->add_option("--out-dir", out_dir, "library directory")->required();
  templates->add_option("--per-class", per_class, "templates per class (default from config)");

  CLI::App* classify_cmd = app.add_subcommand("classify", "classify one working-map raster");
  classify_cmd->add_option("--in", in_path, "input working-map raster (.f32)")->required();
  classify_cmd->add_option("--library", library_dir, "template library directory")->required();
  classify_cmd->add_option("--scores", scores_path, "optional per-template score CSV");

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "evaluate a synthetic validation set");
  eval_cmd->add_option("--library", library_dir, "template library directory")->required();
  eval_cmd->add_option("--out-dir", out_dir, "output directory")->required();
  eval_cmd->add_option("--samples", samples, "validation samples per class (default from config)");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "SNR robustness sweep");
  sweep_cmd->add_option("--out-dir", out_dir, "output directory")->required();
  sweep_cmd->add_option("--deltas", deltas, "comma-separated SNR drops in dB (<= 0)");

  int checkpoint_every = 0;
  CLI::App* render_cmd = app.add_subcommand("render", "debug visualization of the extraction chain");
  render_cmd->add_option("--in", in_path, "input working-map raster (.f32)")->required();
  render_cmd->add_option("--out-dir", out_dir, "output directory")->required();
  render_cmd->add_option("--checkpoint-every", checkpoint_every,
                         "also dump phi snapshots every N evolution rounds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*seed_opt) globals.seed = seed_value;
    if (*map_opt) globals.map_type = map_value;
    if (*snr_opt) globals.snr_db = snr_value;
    const PipelineConfig cfg = load_config(globals);

    if (*dump_opt) {
      std::ofstream os(dump_path);
      if (!os) throw std::runtime_error("cannot open for writing: " + dump_path);
      os << nlohmann::json(cfg).dump(2) << "\n";
      std::cout << "wrote config to " << dump_path << "\n";
      return 0;
    }
    if (sim->parsed()) return cmd_simulate(cfg, activity, out_path);
    if (maps->parsed()) return cmd_maps(cfg, in_path, out_dir);
    if (templates->parsed()) return cmd_templates(cfg, per_class, out_dir);
    if (classify_cmd->parsed()) return cmd_classify(cfg, in_path, library_dir, scores_path);
    if (eval_cmd->parsed()) return cmd_evaluate(cfg, library_dir, samples, out_dir);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, deltas, out_dir);
    if (render_cmd->parsed()) return cmd_render(cfg, in_path, out_dir, checkpoint_every);
    std::cout << app.help();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\": \"" << e.what() << "\"}\n";
    return 1;
  }
}
