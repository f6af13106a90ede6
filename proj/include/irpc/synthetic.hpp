#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "irpc/errors.hpp"
#include "irpc/fitting.hpp"
#include "irpc/frame.hpp"
#include "irpc/parallel.hpp"
#include "irpc/photometric_error.hpp"
#include "irpc/random.hpp"
#include "irpc/sensor_model.hpp"
#include "irpc/timing.hpp"
#include "irpc/trajectory_metrics.hpp"

namespace irpc {

// ---------------------------------------------------------------------------
// Scene

// Piecewise-constant texture on the road: square cells whose irradiance is a
// hash of the cell index, so every point of a cell emits exactly the same
// value.
struct RoadTexture {
  double cell_size = 0.5;
  double base = 3000.0;
  double amplitude = 1500.0;
  std::uint64_t seed = 0;

  std::uint64_t cell_key(double u, double v) const {
    const auto iu = static_cast<std::int64_t>(std::floor(u / cell_size));
    const auto iv = static_cast<std::int64_t>(std::floor(v / cell_size));
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(iu) * 0x9e3779b97f4a7c15ULL ^
                                        static_cast<std::uint64_t>(iv)));
  }

  double irradiance_of(std::uint64_t key) const {
    // 16 discrete levels in [base - amplitude, base + amplitude], rounded to
    // integers so that averaging identical subsamples is exact.
    const double level = static_cast<double>(key >> 60) / 15.0;
    return std::round(base + amplitude * (2.0 * level - 1.0));
  }
};

// Axis-aligned box, optionally translating at constant velocity. Face order:
// -x, +x, -y, +y, -z, +z.
struct Box {
  Point3 center = Point3::Zero();  // at t = 0
  Point3 half_extent = Point3::Ones();
  Point3 velocity = Point3::Zero();
  std::array<double, 6> face_irradiance{};

  bool moving() const { return !velocity.isZero(0.0); }
  Point3 center_at(double t) const { return center + velocity * t; }
};

struct SceneSpec {
  PlaneModel road;
  RoadTexture texture;
  std::vector<Box> boxes;
  double ambient = 800.0;  // irradiance of rays that hit nothing

  void validate() const {
    auto check = [](double v, const char* what) {
      if (!(std::isfinite(v) && v >= 0.0)) throw DomainError(std::string(what) + " must be finite and >= 0");
    };
    check(ambient, "ambient irradiance");
    check(texture.base - texture.amplitude, "road irradiance");
    check(texture.base + texture.amplitude, "road irradiance");
    if (!(texture.cell_size > 0.0)) throw DomainError("road cell size must be positive");
    if (std::abs(road.normal.norm() - 1.0) > 1e-12) throw DomainError("road normal must be unit length");
    for (const auto& b : boxes) {
      for (double v : b.face_irradiance) check(v, "box irradiance");
      if (!(b.half_extent.array() > 0.0).all()) throw DomainError("box extents must be positive");
    }
  }
};

// ---------------------------------------------------------------------------
// Camera

struct CameraIntrinsics {
  double fx = 56.0, fy = 56.0;
  double cx = 31.5, cy = 31.5;
  int width = 64, height = 64;
};

// Pinhole camera translating along `path` at `speed`. Camera axes: x right,
// y down, z forward; `rotation` maps camera to world coordinates.
struct CameraSpec {
  CameraIntrinsics intrinsics;
  LineModel path;
  double speed = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  std::vector<FrameTiming> timings;

  void validate() const {
    const auto& k = intrinsics;
    if (!(k.fx > 0.0 && k.fy > 0.0)) throw DomainError("focal lengths must be positive");
    if (k.width <= 0 || k.height <= 0) throw DomainError("resolution must be positive");
    if (!(k.cx >= 0.0 && k.cx <= k.width - 1 && k.cy >= 0.0 && k.cy <= k.height - 1))
      throw DomainError("principal point outside the image");
    if (timings.empty()) throw DomainError("camera has no frame timings");
    if (std::abs(path.direction.norm() - 1.0) > 1e-12) throw DomainError("path direction must be unit length");
  }

  std::size_t frame_count() const { return timings.size(); }

  Point3 center(std::size_t frame) const {
    return path.at(speed * timings[frame].timestamp().count());
  }

  Point3 ray(double u, double v) const {
    return {(u - intrinsics.cx) / intrinsics.fx, (v - intrinsics.cy) / intrinsics.fy, 1.0};
  }

  // Pixel position and camera-frame depth of a world point.
  std::optional<std::pair<Eigen::Vector2d, double>> project(std::size_t frame, const Point3& x) const {
    const Point3 c = rotation.transpose() * (x - center(frame));
    if (!(c.z() > 1e-9)) return std::nullopt;
    return std::pair{Eigen::Vector2d(intrinsics.fx * c.x() / c.z() + intrinsics.cx,
                                     intrinsics.fy * c.y() / c.z() + intrinsics.cy),
                     c.z()};
  }
};

// Forward-looking camera travelling along a horizontal direction, pitched
// down by `pitch` radians (world z is up).
inline Eigen::Matrix3d forward_camera_rotation(const Point3& direction, double pitch) {
  const Point3 up = Point3::UnitZ();
  const Point3 forward = direction.normalized();
  const Point3 right = forward.cross(up).normalized();
  const Point3 z_cam = std::cos(pitch) * forward - std::sin(pitch) * up;
  const Point3 y_cam = z_cam.cross(right);
  Eigen::Matrix3d r;
  r.col(0) = right;
  r.col(1) = y_cam;
  r.col(2) = z_cam;
  return r;
}

inline Trajectory camera_trajectory(const CameraSpec& camera) {
  std::vector<TrajectorySample> samples;
  for (std::size_t k = 0; k < camera.frame_count(); ++k)
    samples.push_back({camera.timings[k].timestamp().count(), camera.center(k)});
  return Trajectory(std::move(samples));
}

// ---------------------------------------------------------------------------
// Rendering

enum SurfaceLabel : std::uint16_t { kAmbient = 0, kRoad = 1, kFirstBox = 2 };

// What each pixel of one frame sees through its centre ray.
struct SurfaceMap {
  int width = 0, height = 0;
  std::vector<std::uint16_t> label;  // kAmbient, kRoad, or kFirstBox + box index
  std::vector<std::uint64_t> key;    // road cell or box face; equal keys emit equal irradiance
  std::vector<Point3> hit;           // world point (undefined for kAmbient)
  std::vector<std::uint8_t> pure;    // 1 when every subsample saw the same key

  std::size_t index(PixelCoord p) const { return static_cast<std::size_t>(p.y) * width + p.x; }
};

struct RenderedSequence {
  std::vector<Frame> film;  // ideal irradiance images
  std::vector<SurfaceMap> surfaces;
  std::vector<Correspondence> correspondences;
};

struct RenderOptions {
  int supersample = 3;           // subsamples per pixel side, box-filtered
  std::size_t frames_ahead = 2;  // pair frame i with i+1 .. i+frames_ahead
  int stride = 4;                // reference pixel grid spacing
  std::vector<PixelCoord> pattern = default_pattern();
};

namespace detail {

struct Hit {
  double distance = std::numeric_limits<double>::infinity();
  std::uint16_t label = kAmbient;
  std::uint64_t key = 0;
  double irradiance = 0.0;
  Point3 point = Point3::Zero();
};

inline std::pair<Point3, Point3> plane_basis(const Point3& n) {
  const Point3 seed = std::abs(n.x()) < 0.9 ? Point3::UnitX() : Point3::UnitY();
  const Point3 u = (seed - n.dot(seed) * n).normalized();
  return {u, n.cross(u)};
}

inline Hit cast_ray(const SceneSpec& scene, const Point3& origin, const Point3& dir, double time) {
  Hit best;
  const double denom = scene.road.normal.dot(dir);
  if (std::abs(denom) > 1e-12) {
    const double t = -scene.road.signed_distance(origin) / denom;
    if (t > 1e-9) {
      const Point3 x = origin + t * dir;
      const auto [u, v] = plane_basis(scene.road.normal);
      const std::uint64_t key = scene.texture.cell_key(u.dot(x), v.dot(x));
      best = {t, kRoad, key, scene.texture.irradiance_of(key), x};
    }
  }
  for (std::size_t b = 0; b < scene.boxes.size(); ++b) {
    const Box& box = scene.boxes[b];
    const Point3 c = box.center_at(time);
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    int face = -1;
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      const double lo = c(a) - box.half_extent(a), hi = c(a) + box.half_extent(a);
      if (std::abs(dir(a)) < 1e-15) {
        if (origin(a) < lo || origin(a) > hi) miss = true;
        continue;
      }
      double t0 = (lo - origin(a)) / dir(a), t1 = (hi - origin(a)) / dir(a);
      int f0 = 2 * a, f1 = 2 * a + 1;
      if (t0 > t1) {
        std::swap(t0, t1);
        std::swap(f0, f1);
      }
      if (t0 > t_near) {
        t_near = t0;
        face = f0;
      }
      t_far = std::min(t_far, t1);
    }
    if (miss || t_near > t_far || t_near <= 1e-9 || face < 0) continue;
    if (t_near < best.distance) {
      const auto label = static_cast<std::uint16_t>(kFirstBox + b);
      best = {t_near, label, (static_cast<std::uint64_t>(b) << 3) | static_cast<std::uint64_t>(face),
              box.face_irradiance[face], origin + t_near * dir};
    }
  }
  if (best.label == kAmbient) best.irradiance = scene.ambient;
  return best;
}

inline bool is_static(const SceneSpec& scene, std::uint16_t label) {
  if (label == kRoad) return true;
  if (label >= kFirstBox) return !scene.boxes[label - kFirstBox].moving();
  return false;
}

}  // namespace detail

// Ray casts every pixel of every frame at the frame's timestamp. A pixel
// averages `supersample`^2 rays; each ray takes the irradiance of the nearest
// surface (ambient on a miss). A correspondence is emitted for a reference
// pixel on static geometry whose projection, rounded to the nearest pixel,
// lands on the same surface cell in the target frame for every pattern
// offset, with all involved pixels pure, so paired pixels carry exactly equal
// irradiance.
inline RenderedSequence render_irradiance_sequence(const SceneSpec& scene, const CameraSpec& camera,
                                                   const RenderOptions& options = {}) {
  scene.validate();
  camera.validate();
  if (options.supersample < 1) throw DomainError("supersample must be at least 1");
  const auto& k = camera.intrinsics;
  const std::size_t n = camera.frame_count();
  RenderedSequence out;
  out.film.resize(n);
  out.surfaces.resize(n);
  const int ss = options.supersample;

  parallel_for(n, [&](std::size_t f) {
    const Point3 origin = camera.center(f);
    const double time = camera.timings[f].timestamp().count();
    SurfaceMap map{k.width, k.height, {}, {}, {}, {}};
    const std::size_t pixels = static_cast<std::size_t>(k.width) * k.height;
    map.label.resize(pixels);
    map.key.resize(pixels);
    map.hit.resize(pixels);
    map.pure.resize(pixels);
    std::vector<double> irr(pixels);
    for (int v = 0; v < k.height; ++v) {
      for (int u = 0; u < k.width; ++u) {
        const std::size_t idx = map.index({u, v});
        const auto centre = detail::cast_ray(scene, origin, camera.rotation * camera.ray(u, v), time);
        map.label[idx] = centre.label;
        map.key[idx] = centre.key;
        map.hit[idx] = centre.point;
        if (ss == 1) {
          irr[idx] = centre.irradiance;
          map.pure[idx] = 1;
          continue;
        }
        double sum = 0.0;
        bool pure = true;
        for (int sy = 0; sy < ss; ++sy)
          for (int sx = 0; sx < ss; ++sx) {
            const double du = (sx + 0.5) / ss - 0.5, dv = (sy + 0.5) / ss - 0.5;
            const auto h = detail::cast_ray(scene, origin, camera.rotation * camera.ray(u + du, v + dv), time);
            sum += h.irradiance;
            pure = pure && h.label == centre.label && h.key == centre.key;
          }
        map.pure[idx] = pure ? 1 : 0;
        irr[idx] = pure ? centre.irradiance : sum / (ss * ss);
      }
    }
    out.film[f] = Frame(k.width, k.height, std::move(irr), camera.timings[f]);
    out.surfaces[f] = std::move(map);
  });

  if (options.stride <= 0) throw DomainError("correspondence stride must be positive");
  int margin = 0;
  for (const auto& o : options.pattern) margin = std::max({margin, std::abs(o.x), std::abs(o.y)});
  auto inside = [&](PixelCoord p) {
    return p.x >= margin && p.y >= margin && p.x < k.width - margin && p.y < k.height - margin;
  };

  for (std::size_t i = 1; i < n; ++i) {
    const SurfaceMap& si = out.surfaces[i];
    for (std::size_t j = i + 1; j < n && j <= i + options.frames_ahead; ++j) {
      const SurfaceMap& sj = out.surfaces[j];
      for (int v = margin; v < k.height - margin; v += options.stride) {
        for (int u = margin; u < k.width - margin; u += options.stride) {
          const PixelCoord p{u, v};
          const std::uint16_t label = si.label[si.index(p)];
          if (!detail::is_static(scene, label)) continue;
          const auto proj = camera.project(j, si.hit[si.index(p)]);
          if (!proj) continue;
          const PixelCoord q{static_cast<int>(std::lround(proj->first.x())),
                             static_cast<int>(std::lround(proj->first.y()))};
          if (!inside(q)) continue;
          bool consistent = true;
          for (const auto& o : options.pattern) {
            const std::size_t a = si.index(p + o), b = sj.index(q + o);
            if (!si.pure[a] || !sj.pure[b] || si.label[a] != sj.label[b] || !detail::is_static(scene, si.label[a]) ||
                si.key[a] != sj.key[b] ||
                out.film[i].data()[a] != out.film[j].data()[b]) {
              consistent = false;
              break;
            }
          }
          if (consistent) out.correspondences.push_back({i, p, j, q, options.pattern});
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Raw video

// Pushes an ideal irradiance film through the sensor model pixel by pixel and
// adds seeded Gaussian noise afterwards. Noise for frame k is drawn in
// row-major order from Rng::substream(noise_seed, k).
inline VideoSequence synthesize_raw_video(std::span<const Frame> film, std::span<const FrameTiming> timings,
                                          const TimeConstants& taus, SimulationMode mode, double noise_sigma,
                                          std::uint64_t noise_seed = 0) {
  if (film.empty()) throw DomainError("empty film");
  if (film.size() != timings.size()) throw DomainError("film and timing sequences differ in length");
  if (!(noise_sigma >= 0.0 && std::isfinite(noise_sigma))) throw DomainError("noise sigma must be >= 0");
  const int w = film[0].width(), h = film[0].height();
  for (const auto& f : film)
    if (f.width() != w || f.height() != h) throw DomainError("film frames differ in size");
  const std::size_t n = film.size();
  const std::size_t pixels = film[0].size();

  std::vector<std::vector<double>> raw(n, std::vector<double>(pixels));
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    std::vector<double> series(n);
    for (std::size_t x = 0; x < static_cast<std::size_t>(w); ++x) {
      const std::size_t p = row * w + x;
      for (std::size_t k = 0; k < n; ++k) series[k] = film[k].data()[p];
      const auto measured = simulate_pixel_sequence(series, timings, taus, mode);
      for (std::size_t k = 0; k < n; ++k) raw[k][p] = measured[k];
    }
  });

  if (noise_sigma > 0.0) {
    parallel_for(n, [&](std::size_t k) {
      Rng rng = Rng::substream(noise_seed, k);
      for (double& v : raw[k]) v += noise_sigma * rng.normal();
    });
  }

  std::vector<Frame> frames;
  frames.reserve(n);
  for (std::size_t k = 0; k < n; ++k) frames.emplace_back(w, h, std::move(raw[k]), timings[k]);
  return VideoSequence(std::move(frames));
}

// ---------------------------------------------------------------------------
// Benchmark

struct BenchmarkOptions {
  std::uint64_t seed = 0;
  int width = 64;
  int height = 64;
  std::size_t frames = 60;
  double fps = 30.0;
  std::vector<double> exposures_ms = {5.0, 10.0, 20.0};
  std::optional<TimeConstants> taus;  // drawn from [8 ms, 15 ms] when absent
  SimulationMode mode = SimulationMode::PaperConsistent;
  double noise_sigma = 0.0;
  bool moving_objects = true;
  double speed = 5.0;  // m/s along the road
  RenderOptions render;
};

struct GroundTruthBundle {
  SceneSpec scene;
  CameraSpec camera;
  std::vector<Frame> film;
  VideoSequence raw;
  TimeConstants taus{Seconds{1.0}, Seconds{1.0}};
  PlaneModel plane;
  LineModel line;
  Trajectory trajectory;
  std::vector<Correspondence> correspondences;
  std::vector<SurfaceMap> surfaces;
  SimulationMode mode = SimulationMode::PaperConsistent;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

// Desk-scale road scene: textured planar road, roadside boxes, a hot car
// driving ahead and a hot pedestrian crossing, seen by a forward camera
// moving on a straight line.
//
// Random draws, in order, from Rng(seed): tau_h, tau_c (uniform in
// [8, 15] ms, both drawn even when overridden), one exposure index per frame,
// the road texture seed, six face irradiances per static box. Noise uses
// Rng::substream(seed, frame).
inline GroundTruthBundle make_benchmark(const BenchmarkOptions& opt) {
  if (opt.frames < 2) throw DomainError("benchmark needs at least two frames");
  if (opt.exposures_ms.empty()) throw DomainError("benchmark needs at least one exposure");
  if (!(opt.fps > 0.0)) throw DomainError("fps must be positive");
  Rng rng(opt.seed);

  const double tau_h = rng.uniform(8e-3, 15e-3);
  const double tau_c = rng.uniform(8e-3, 15e-3);
  GroundTruthBundle b;
  b.taus = opt.taus.value_or(TimeConstants{Seconds{tau_h}, Seconds{tau_c}});
  b.mode = opt.mode;
  b.noise_sigma = opt.noise_sigma;
  b.seed = opt.seed;

  const double period = 1.0 / opt.fps;
  std::vector<FrameTiming> timings;
  for (std::size_t k = 0; k < opt.frames; ++k) {
    const double exposure = opt.exposures_ms[rng.index(opt.exposures_ms.size())] * 1e-3;
    if (!(exposure < period)) throw DomainError("exposure exceeds the frame period");
    timings.emplace_back(Seconds{static_cast<double>(k) * period}, Seconds{exposure}, Seconds{period - exposure});
  }

  SceneSpec& scene = b.scene;
  scene.road = PlaneModel{Point3::UnitZ(), 0.0};
  scene.texture = RoadTexture{0.25, 3000.0, 1500.0, rng.next()};
  scene.ambient = 800.0;
  const std::array<std::pair<Point3, Point3>, 4> statics = {{
      {{-3.2, 8.0, 0.8}, {0.8, 1.5, 0.8}},
      {{3.4, 12.0, 1.0}, {1.0, 2.0, 1.0}},
      {{-3.6, 16.0, 1.5}, {1.0, 1.5, 1.5}},
      {{3.0, 20.0, 0.7}, {0.8, 1.6, 0.7}},
  }};
  for (const auto& [center, half] : statics) {
    Box box{center, half, Point3::Zero(), {}};
    for (double& v : box.face_irradiance) v = std::round(rng.uniform(2000.0, 8000.0));
    scene.boxes.push_back(box);
  }
  if (opt.moving_objects) {
    scene.boxes.push_back(Box{{1.0, 7.0, 0.6}, {0.8, 1.8, 0.6}, {0.0, 2.5, 0.0},
                              {20000.0, 20000.0, 20000.0, 20000.0, 20000.0, 20000.0}});
    scene.boxes.push_back(Box{{-2.5, 9.0, 0.9}, {0.25, 0.25, 0.9}, {2.5, 0.0, 0.0},
                              {16000.0, 16000.0, 16000.0, 16000.0, 16000.0, 16000.0}});
  }

  CameraSpec& cam = b.camera;
  cam.intrinsics = CameraIntrinsics{56.0, 56.0, (opt.width - 1) / 2.0, (opt.height - 1) / 2.0, opt.width, opt.height};
  cam.path = LineModel{{0.0, 0.0, 1.5}, Point3::UnitY()};
  cam.speed = opt.speed;
  cam.rotation = forward_camera_rotation(cam.path.direction, 12.0 * std::numbers::pi / 180.0);
  cam.timings = timings;

  auto rendered = render_irradiance_sequence(scene, cam, opt.render);
  b.film = std::move(rendered.film);
  b.surfaces = std::move(rendered.surfaces);
  b.correspondences = std::move(rendered.correspondences);
  b.raw = synthesize_raw_video(b.film, timings, b.taus, opt.mode, opt.noise_sigma, opt.seed);
  b.plane = scene.road;
  b.line = cam.path;
  b.trajectory = camera_trajectory(cam);
  return b;
}

inline GroundTruthBundle default_benchmark(std::uint64_t seed) {
  BenchmarkOptions opt;
  opt.seed = seed;
  return make_benchmark(opt);
}

inline double mean_intensity(std::span<const Frame> frames) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& f : frames)
    for (double v : f.data()) {
      sum += v;
      ++count;
    }
  return count ? sum / static_cast<double>(count) : 0.0;
}

// ---------------------------------------------------------------------------
// Multi-view depth search

struct LiftOptions {
  double min_depth = 1.0;
  double max_depth = 12.0;  // the road texture aliases further out
  int depth_samples = 800;  // uniform in inverse depth
  int patch_radius = 2;
  int stride = 2;
  double min_gradient = 50.0;  // skip textureless reference pixels
  double min_parallax = 4.0;   // pixels swept by the depth range in the first target
  double uniqueness = 0.7;     // best cost must be below this fraction of any rival minimum
};

// Lifts pixels of frame `reference` that see `label` into 3D. For each pixel
// the depth along its ray minimising the patch SSD summed over the `targets`
// (bilinear sampling, fronto-parallel patch) is taken, with parabolic
// refinement in inverse depth. Pixels with too little parallax, and minima
// on the edge of the search range, are dropped. Intensities are compared as
// given, so raw frames with differing exposure or ghosting degrade the
// search.
inline std::vector<Point3> lift_points(const VideoSequence& frames, const CameraSpec& camera,
                                       const SurfaceMap& reference_surface, std::uint16_t label,
                                       std::size_t reference, std::span<const std::size_t> targets,
                                       const LiftOptions& opt = {}) {
  if (reference >= frames.size() || targets.empty()) throw DomainError("invalid frames for lifting");
  for (std::size_t t : targets)
    if (t >= frames.size() || t == reference) throw DomainError("invalid target frame for lifting");
  if (opt.depth_samples < 3) throw DomainError("need at least three depth samples");
  const Frame& ref = frames[reference];
  const int r = opt.patch_radius;
  const Point3 origin = camera.center(reference);
  const double rho_lo = 1.0 / opt.max_depth, rho_hi = 1.0 / opt.min_depth;
  auto rho_at = [&](double s) { return rho_lo + (rho_hi - rho_lo) * s / (opt.depth_samples - 1); };
  std::vector<Point3> out;

  for (int v = r; v < ref.height() - r; v += opt.stride) {
    for (int u = r; u < ref.width() - r; u += opt.stride) {
      if (reference_surface.label[reference_surface.index({u, v})] != label) continue;
      if (ref.gradient_magnitude({u, v}) < opt.min_gradient) continue;
      const Point3 dir = camera.rotation * camera.ray(u, v);

      const auto near = camera.project(targets[0], origin + dir / rho_hi);
      const auto far = camera.project(targets[0], origin + dir / rho_lo);
      if (!near || !far || (near->first - far->first).norm() < opt.min_parallax) continue;

      std::vector<double> cost(opt.depth_samples, 0.0);
      for (int s = 0; s < opt.depth_samples; ++s) {
        const Point3 x = origin + dir / rho_at(s);
        for (std::size_t t : targets) {
          const Frame& tgt = frames[t];
          const auto proj = camera.project(t, x);
          const double pu = proj ? proj->first.x() : -1.0, pv = proj ? proj->first.y() : -1.0;
          if (!proj || pu < r || pv < r || pu > tgt.width() - 1 - r || pv > tgt.height() - 1 - r) {
            cost[s] = std::numeric_limits<double>::infinity();
            break;
          }
          for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
              const double e = ref(u + dx, v + dy) - tgt.sample(pu + dx, pv + dy);
              cost[s] += e * e;
            }
        }
      }
      int best = -1;
      for (int s = 0; s < opt.depth_samples; ++s)
        if (std::isfinite(cost[s]) && (best < 0 || cost[s] < cost[best])) best = s;
      // unresolved: the minimum sits on the edge of the searchable range
      if (best <= 0 || best + 1 >= opt.depth_samples || !std::isfinite(cost[best - 1]) ||
          !std::isfinite(cost[best + 1]))
        continue;
      bool ambiguous = false;
      for (int s = 1; s + 1 < opt.depth_samples && !ambiguous; ++s) {
        if (std::abs(s - best) <= 2 || !(cost[s] <= cost[s - 1] && cost[s] <= cost[s + 1])) continue;
        ambiguous = opt.uniqueness * cost[s] <= cost[best];
      }
      if (ambiguous) continue;
      double s_ref = best;
      const double denom = cost[best - 1] - 2.0 * cost[best] + cost[best + 1];
      if (denom > 0.0) s_ref += 0.5 * (cost[best - 1] - cost[best + 1]) / denom;
      out.push_back(origin + dir / rho_at(s_ref));
    }
  }
  return out;
}

}  // namespace irpc
