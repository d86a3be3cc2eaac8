#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "twr/echo_sim.hpp"
#include "twr/grid.hpp"
#include "twr/topo_match.hpp"

// Little-endian binary formats; header layouts are documented in the README.

namespace twr::io {

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

inline void write_f32(std::ostream& os, float v) { os.write(reinterpret_cast<const char*>(&v), 4); }

inline float read_f32(std::istream& is) {
  float v = 0.0f;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::binary) {
  std::ofstream os(path, mode);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::binary) {
  std::ifstream is(path, mode);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}

inline void check_magic(std::istream& is, const char* magic, const std::string& path) {
  char buf[8] = {};
  is.read(buf, 8);
  if (std::memcmp(buf, magic, 8) != 0) throw std::runtime_error("bad magic in " + path);
}

}  // namespace detail

// --- echo matrix: "TWRECHO1", u32 N, u32 M, N*M complex64 pairs row-major ---

inline void write_echo(const EchoMatrix& echo, const std::string& path) {
  auto os = detail::open_out(path);
  os.write("TWRECHO1", 8);
  detail::write_u32(os, static_cast<std::uint32_t>(echo.data.rows()));
  detail::write_u32(os, static_cast<std::uint32_t>(echo.data.cols()));
  for (const std::complex<double>& v : echo.data.raw()) {
    detail::write_f32(os, static_cast<float>(v.real()));
    detail::write_f32(os, static_cast<float>(v.imag()));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline ComplexGrid read_echo(const std::string& path) {
  auto is = detail::open_in(path);
  detail::check_magic(is, "TWRECHO1", path);
  const std::uint32_t rows = detail::read_u32(is);
  const std::uint32_t cols = detail::read_u32(is);
  ComplexGrid grid(static_cast<int>(rows), static_cast<int>(cols));
  for (std::complex<double>& v : grid.raw()) {
    const float re = detail::read_f32(is);
    const float im = detail::read_f32(is);
    v = {re, im};
  }
  if (!is) throw std::runtime_error("truncated echo file: " + path);
  return grid;
}

// --- float raster: "TWRMAPF1", u32 rows, u32 cols, rows*cols f32 row-major ---

inline void write_float_raster(const RealGrid& grid, const std::string& path) {
  auto os = detail::open_out(path);
  os.write("TWRMAPF1", 8);
  detail::write_u32(os, static_cast<std::uint32_t>(grid.rows()));
  detail::write_u32(os, static_cast<std::uint32_t>(grid.cols()));
  for (double v : grid.raw()) detail::write_f32(os, static_cast<float>(v));
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline RealGrid read_float_raster(const std::string& path) {
  auto is = detail::open_in(path);
  detail::check_magic(is, "TWRMAPF1", path);
  const std::uint32_t rows = detail::read_u32(is);
  const std::uint32_t cols = detail::read_u32(is);
  RealGrid grid(static_cast<int>(rows), static_cast<int>(cols));
  for (double& v : grid.raw()) v = detail::read_f32(is);
  if (!is) throw std::runtime_error("truncated raster file: " + path);
  return grid;
}

// --- rasters for inspection ---

/// 8-bit PGM, peak-normalized.
inline void write_pgm(const RealGrid& grid, const std::string& path) {
  auto os = detail::open_out(path);
  os << "P5\n" << grid.cols() << " " << grid.rows() << "\n255\n";
  double mx = 0.0;
  for (double v : grid.raw()) mx = std::max(mx, v);
  for (double v : grid.raw()) {
    const int byte = mx > 0.0 ? static_cast<int>(255.0 * std::clamp(v / mx, 0.0, 1.0) + 0.5) : 0;
    os.put(static_cast<char>(byte));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline void write_pbm(const MaskGrid& mask, const std::string& path) {
  auto os = detail::open_out(path, std::ios::out);
  os << "P1\n" << mask.cols() << " " << mask.rows() << "\n";
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) os << (mask(r, c) ? '1' : '0') << (c + 1 < mask.cols() ? ' ' : '\n');
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

// --- CSV helpers ---

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

inline void write_axis_csv(const std::vector<double>& axis, const std::string& name, const std::string& path) {
  auto os = detail::open_out(path, std::ios::out);
  os << "index," << name << "\n";
  for (size_t i = 0; i < axis.size(); ++i) os << i << "," << format_double(axis[i]) << "\n";
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline void write_pointcloud_csv(const PointCloud& pc, const std::string& path) {
  auto os = detail::open_out(path, std::ios::out);
  for (const Point2& p : pc.points) os << format_double(p.x) << "," << format_double(p.y) << "\n";
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline PointCloud read_pointcloud_csv(const std::string& path) {
  auto is = detail::open_in(path, std::ios::in);
  PointCloud pc;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed point cloud line in " + path);
    pc.points.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return pc;
}

// --- template library directory: manifest.json + one CSV per template ---

inline void save_template_library(const TemplateLibrary& lib, const std::string& dir) {
  lib.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["map_type"] = lib.map_type;
  manifest["class_count"] = lib.class_count();
  manifest["templates_per_class"] = lib.templates[0].size();
  manifest["class_names"] = lib.class_names;
  manifest["cover"] = {{"n_x", lib.cover_nx}, {"n_y", lib.cover_ny}, {"overlap_factor", lib.cover_overlap}};

  for (size_t cls = 0; cls < lib.templates.size(); ++cls)
    for (size_t i = 0; i < lib.templates[cls].size(); ++i) {
      std::ostringstream name;
      name << "cloud_" << std::setw(2) << std::setfill('0') << (cls + 1) << "_" << std::setw(3) << i << ".csv";
      write_pointcloud_csv(lib.templates[cls][i], (std::filesystem::path(dir) / name.str()).string());
    }

  auto os = detail::open_out((std::filesystem::path(dir) / "manifest.json").string(), std::ios::out);
  os << manifest.dump(2) << "\n";
}

inline TemplateLibrary load_template_library(const std::string& dir) {
  auto is = detail::open_in((std::filesystem::path(dir) / "manifest.json").string(), std::ios::in);
  nlohmann::json manifest = nlohmann::json::parse(is);
  TemplateLibrary lib;
  lib.map_type = manifest.at("map_type").get<std::string>();
  lib.class_names = manifest.at("class_names").get<std::vector<std::string>>();
  lib.cover_nx = manifest.at("cover").at("n_x").get<int>();
  lib.cover_ny = manifest.at("cover").at("n_y").get<int>();
  lib.cover_overlap = manifest.at("cover").at("overlap_factor").get<double>();
  const int cla = manifest.at("class_count").get<int>();
  const int per_class = manifest.at("templates_per_class").get<int>();
  lib.templates.resize(cla);
  for (int cls = 0; cls < cla; ++cls) {
    lib.templates[cls].resize(per_class);
    for (int i = 0; i < per_class; ++i) {
      std::ostringstream name;
      name << "cloud_" << std::setw(2) << std::setfill('0') << (cls + 1) << "_" << std::setw(3) << i << ".csv";
      lib.templates[cls][i] = read_pointcloud_csv((std::filesystem::path(dir) / name.str()).string());
    }
  }
  lib.validate();
  return lib;
}

}  // namespace twr::io
