#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "irpc/errors.hpp"
#include "irpc/fitting.hpp"
#include "irpc/frame.hpp"
#include "irpc/io/csv.hpp"
#include "irpc/io/plane_file.hpp"
#include "irpc/io/pnm.hpp"
#include "irpc/photometric_error.hpp"
#include "irpc/synthetic.hpp"

namespace irpc::io {

// Directory layout:
//   manifest.csv          frame_index,timestamp_s,exposure_s,readout_s
//   raw_NNNN.pgm          raw frames, 16-bit P5 (rounded and clamped)
//   raw_NNNN.irf          raw frames, IRF8 (lossless)
//   film_NNNN.irf         ideal irradiance, IRF8
//   label_NNNN.pgm        surface label per pixel, 8-bit P5
//   truth.csv             key,value: time constants, road plane, camera line
//   correspondences.csv   frame_i,x,y,frame_j,x_prime,y_prime
//   camera.csv            key,value: intrinsics, path, speed, rotation
//   trajectory.csv        t,x,y,z camera centres
inline constexpr const char* kManifest = "manifest.csv";
inline constexpr const char* kTruth = "truth.csv";
inline constexpr const char* kCorrespondences = "correspondences.csv";
inline constexpr const char* kCamera = "camera.csv";
inline constexpr const char* kTrajectory = "trajectory.csv";

inline std::string frame_file(const std::string& prefix, std::size_t index, const std::string& ext) {
  return fmt::format("{}_{:04}.{}", prefix, index, ext);
}

inline void write_manifest(const std::filesystem::path& path, std::span<const FrameTiming> timings) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "frame_index,timestamp_s,exposure_s,readout_s\n";
  for (std::size_t k = 0; k < timings.size(); ++k)
    out << fmt::format("{},{},{},{}\n", k, timings[k].timestamp().count(), timings[k].exposure().count(),
                       timings[k].readout().count());
}

inline std::vector<FrameTiming> read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FormatError("missing manifest: " + path.string());
  const CsvTable t = read_csv(path);
  std::vector<FrameTiming> timings;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != 4)
      throw FormatError(fmt::format("{}:{}: expected 4 columns", path.string(), t.line_numbers[r]));
    if (field_as_double(t, r, 0, path) != static_cast<double>(r))
      throw FormatError(fmt::format("{}:{}: frame indices must be 0,1,2,...", path.string(), t.line_numbers[r]));
    try {
      timings.emplace_back(Seconds{field_as_double(t, r, 1, path)}, Seconds{field_as_double(t, r, 2, path)},
                           Seconds{field_as_double(t, r, 3, path)});
    } catch (const DomainError& e) {
      throw FormatError(fmt::format("{}:{}: {}", path.string(), t.line_numbers[r], e.what()));
    }
  }
  if (timings.empty()) throw FormatError(path.string() + ": manifest lists no frames");
  return timings;
}

inline void write_frame_pgm(const std::filesystem::path& path, const Frame& f) {
  Graymap g{f.width(), f.height(), 65535, {}};
  g.samples.reserve(f.size());
  for (double v : f.data()) g.samples.push_back(quantize16(v));
  write_pgm(path, g);
}

inline void write_frame_plane(const std::filesystem::path& path, const Frame& f, PlanePrecision precision) {
  write_plane(path, FloatPlane{f.width(), f.height(), {f.data().begin(), f.data().end()}}, precision);
}

// Loads `<prefix>_NNNN` frames listed in the directory's manifest, preferring
// the floating-point plane over the graymap when both exist.
inline VideoSequence read_sequence(const std::filesystem::path& dir, const std::string& prefix) {
  const auto timings = read_manifest(dir / kManifest);
  std::vector<Frame> frames;
  for (std::size_t k = 0; k < timings.size(); ++k) {
    const auto plane_path = dir / frame_file(prefix, k, "irf");
    const auto pgm_path = dir / frame_file(prefix, k, "pgm");
    if (std::filesystem::exists(plane_path)) {
      auto p = read_plane(plane_path);
      frames.emplace_back(p.width, p.height, std::move(p.samples), timings[k]);
    } else if (std::filesystem::exists(pgm_path)) {
      const auto g = read_pgm(pgm_path);
      frames.emplace_back(g.width, g.height, std::vector<double>(g.samples.begin(), g.samples.end()), timings[k]);
    } else {
      throw FormatError("missing frame file: " + pgm_path.string());
    }
  }
  try {
    return VideoSequence(std::move(frames));
  } catch (const DomainError& e) {
    throw FormatError(dir.string() + ": " + e.what());
  }
}

// Key/value CSV helpers.
inline void write_key_values(const std::filesystem::path& path,
                             const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "key,value\n";
  for (const auto& [k, v] : kv) out << k << ',' << v << '\n';
}

inline std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FormatError("missing file: " + path.string());
  std::ifstream in(path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto fields = detail::split(line);
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 2) throw FormatError(fmt::format("{}:{}: expected key,value", path.string(), number));
    if (number == 1 && fields[0] == "key") continue;
    out[fields[0]] = fields[1];
  }
  return out;
}

inline double kv_double(const std::map<std::string, std::string>& kv, const std::string& key,
                        const std::filesystem::path& path) {
  const auto it = kv.find(key);
  double v;
  if (it == kv.end() || !detail::parse_double(it->second, v))
    throw FormatError(path.string() + ": missing or malformed key '" + key + "'");
  return v;
}

struct TruthRecord {
  TimeConstants taus{Seconds{1.0}, Seconds{1.0}};
  PlaneModel plane;
  LineModel line;
  SimulationMode mode = SimulationMode::PaperConsistent;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

inline void write_truth(const std::filesystem::path& path, const TruthRecord& t) {
  auto d = [](double v) { return fmt::format("{}", v); };
  write_key_values(path, {{"tau_h_s", d(t.taus.tau_h().count())},
                          {"tau_c_s", d(t.taus.tau_c().count())},
                          {"plane_nx", d(t.plane.normal.x())},
                          {"plane_ny", d(t.plane.normal.y())},
                          {"plane_nz", d(t.plane.normal.z())},
                          {"plane_offset", d(t.plane.offset)},
                          {"line_ax", d(t.line.anchor.x())},
                          {"line_ay", d(t.line.anchor.y())},
                          {"line_az", d(t.line.anchor.z())},
                          {"line_dx", d(t.line.direction.x())},
                          {"line_dy", d(t.line.direction.y())},
                          {"line_dz", d(t.line.direction.z())},
                          {"mode", to_string(t.mode)},
                          {"noise_sigma", d(t.noise_sigma)},
                          {"seed", fmt::format("{}", t.seed)}});
}

inline TruthRecord read_truth(const std::filesystem::path& path) {
  const auto kv = read_key_values(path);
  auto g = [&](const std::string& k) { return kv_double(kv, k, path); };
  TruthRecord t;
  try {
    t.taus = TimeConstants{Seconds{g("tau_h_s")}, Seconds{g("tau_c_s")}};
  } catch (const DomainError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  t.plane = PlaneModel{{g("plane_nx"), g("plane_ny"), g("plane_nz")}, g("plane_offset")};
  t.line = LineModel{{g("line_ax"), g("line_ay"), g("line_az")}, {g("line_dx"), g("line_dy"), g("line_dz")}};
  if (auto it = kv.find("mode"); it != kv.end())
    t.mode = it->second == "physical" ? SimulationMode::PhysicalODE : SimulationMode::PaperConsistent;
  if (kv.count("noise_sigma")) t.noise_sigma = g("noise_sigma");
  if (auto it = kv.find("seed"); it != kv.end()) t.seed = std::stoull(it->second);
  return t;
}

inline void write_correspondences(const std::filesystem::path& path, std::span<const Correspondence> corrs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "frame_i,x,y,frame_j,x_prime,y_prime\n";
  for (const auto& c : corrs)
    out << fmt::format("{},{},{},{},{},{}\n", c.frame_i, c.point_p.x, c.point_p.y, c.frame_j, c.point_p_prime.x,
                       c.point_p_prime.y);
}

// Every correspondence receives `pattern`.
inline std::vector<Correspondence> read_correspondences(const std::filesystem::path& path,
                                                        const std::vector<PixelCoord>& pattern = default_pattern()) {
  if (!std::filesystem::exists(path)) throw FormatError("missing file: " + path.string());
  const CsvTable t = read_csv(path);
  std::vector<Correspondence> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != 6)
      throw FormatError(fmt::format("{}:{}: expected 6 columns", path.string(), t.line_numbers[r]));
    int v[6];
    for (std::size_t c = 0; c < 6; ++c) {
      const double x = field_as_double(t, r, c, path);
      if (x != std::floor(x) || x < 0 || x > 1e9)
        throw FormatError(fmt::format("{}:{}: expected a non-negative integer in column {}", path.string(),
                                      t.line_numbers[r], c + 1));
      v[c] = static_cast<int>(x);
    }
    out.push_back({static_cast<std::size_t>(v[0]), {v[1], v[2]}, static_cast<std::size_t>(v[3]), {v[4], v[5]},
                   pattern});
  }
  return out;
}

inline void write_camera(const std::filesystem::path& path, const CameraSpec& cam) {
  auto d = [](double v) { return fmt::format("{}", v); };
  std::vector<std::pair<std::string, std::string>> kv = {
      {"fx", d(cam.intrinsics.fx)},         {"fy", d(cam.intrinsics.fy)},
      {"cx", d(cam.intrinsics.cx)},         {"cy", d(cam.intrinsics.cy)},
      {"width", d(cam.intrinsics.width)},   {"height", d(cam.intrinsics.height)},
      {"speed", d(cam.speed)},              {"path_ax", d(cam.path.anchor.x())},
      {"path_ay", d(cam.path.anchor.y())},  {"path_az", d(cam.path.anchor.z())},
      {"path_dx", d(cam.path.direction.x())}, {"path_dy", d(cam.path.direction.y())},
      {"path_dz", d(cam.path.direction.z())}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) kv.emplace_back(fmt::format("r{}{}", r, c), d(cam.rotation(r, c)));
  write_key_values(path, kv);
}

inline CameraSpec read_camera(const std::filesystem::path& path, std::vector<FrameTiming> timings) {
  const auto kv = read_key_values(path);
  auto g = [&](const std::string& k) { return kv_double(kv, k, path); };
  CameraSpec cam;
  cam.intrinsics = {g("fx"), g("fy"), g("cx"), g("cy"), static_cast<int>(g("width")), static_cast<int>(g("height"))};
  cam.speed = g("speed");
  cam.path = LineModel{{g("path_ax"), g("path_ay"), g("path_az")}, {g("path_dx"), g("path_dy"), g("path_dz")}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cam.rotation(r, c) = g(fmt::format("r{}{}", r, c));
  cam.timings = std::move(timings);
  return cam;
}

inline void write_bundle(const GroundTruthBundle& b, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
  std::vector<FrameTiming> timings;
  for (const auto& f : b.raw) timings.push_back(f.timing());
  write_manifest(dir / kManifest, timings);
  for (std::size_t k = 0; k < b.raw.size(); ++k) {
    write_frame_pgm(dir / frame_file("raw", k, "pgm"), b.raw[k]);
    write_frame_plane(dir / frame_file("raw", k, "irf"), b.raw[k], PlanePrecision::Float64);
    write_frame_plane(dir / frame_file("film", k, "irf"), b.film[k], PlanePrecision::Float64);
    const SurfaceMap& s = b.surfaces[k];
    Graymap labels{s.width, s.height, 255, {}};
    for (auto l : s.label) labels.samples.push_back(std::min<std::uint16_t>(l, 255));
    write_pgm(dir / frame_file("label", k, "pgm"), labels);
  }
  write_truth(dir / kTruth, {b.taus, b.plane, b.line, b.mode, b.noise_sigma, b.seed});
  write_correspondences(dir / kCorrespondences, b.correspondences);
  write_camera(dir / kCamera, b.camera);
  write_trajectory(dir / kTrajectory, b.trajectory);
}

// Reads the surface labels written by write_bundle (label channel only).
inline std::vector<SurfaceMap> read_labels(const std::filesystem::path& dir, std::size_t frames) {
  std::vector<SurfaceMap> out;
  for (std::size_t k = 0; k < frames; ++k) {
    const auto g = read_pgm(dir / frame_file("label", k, "pgm"));
    SurfaceMap m;
    m.width = g.width;
    m.height = g.height;
    m.label.assign(g.samples.begin(), g.samples.end());
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace irpc::io
