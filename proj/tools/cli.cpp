#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "irpc/irpc.hpp"
#include "irpc/io/bundle.hpp"
#include "irpc/io/digest.hpp"
#include "irpc/io/report.hpp"

namespace fs = std::filesystem;

namespace irpc::cli {
namespace {

constexpr double kIllConditioned = 1e6;

std::vector<double> parse_list(const std::string& text, std::size_t expected, const std::string& flag) {
  std::vector<double> out;
  for (const auto& field : io::detail::split(text)) {
    double v;
    if (!io::detail::parse_double(field, v)) throw DomainError(flag + ": '" + field + "' is not a number");
    out.push_back(v);
  }
  if (expected != 0 && out.size() != expected)
    throw DomainError(fmt::format("{}: expected {} comma-separated values", flag, expected));
  if (out.empty()) throw DomainError(flag + ": empty list");
  return out;
}

TimeConstants parse_taus_ms(const std::string& text, const std::string& flag) {
  const auto v = parse_list(text, 2, flag);
  return {milliseconds(v[0]), milliseconds(v[1])};
}

// "from-truth", "report:PATH" (tau_h_s/tau_c_s keys of an estimate report)
// or "H,C" in milliseconds.
TimeConstants resolve_taus(const std::string& spec, const fs::path& bundle) {
  if (spec == "from-truth") return io::read_truth(bundle / io::kTruth).taus;
  if (spec.rfind("report:", 0) == 0) {
    const fs::path path = spec.substr(7);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto kv = io::parse_report(text);
    double h, c;
    if (!kv.count("tau_h_s") || !kv.count("tau_c_s") || !io::detail::parse_double(kv.at("tau_h_s"), h) ||
        !io::detail::parse_double(kv.at("tau_c_s"), c))
      throw FormatError(path.string() + ": report lacks tau_h_s/tau_c_s");
    return {Seconds{h}, Seconds{c}};
  }
  return parse_taus_ms(spec, "--taus");
}

std::string join(const std::vector<double>& v, const char* sep = ";") {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? sep : "") + fmt::format("{}", v[k]);
  return out;
}

void emit(const io::RunReport& report, const std::string& report_path, std::ostream& out) {
  out << report.str();
  if (!report_path.empty()) report.write(report_path);
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::uint64_t seed = 0;
  std::string out;
  std::string mode = "paper";
  double noise = 0.0;
  std::string exposures = "5,10,20";
  std::size_t frames = 60;
  double fps = 30.0;
  std::string taus;
  double speed = 5.0;
  bool no_moving = false;
  std::string report;
};

void cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  BenchmarkOptions opt;
  opt.seed = a.seed;
  opt.frames = a.frames;
  opt.fps = a.fps;
  opt.exposures_ms = parse_list(a.exposures, 0, "--exposures");
  if (!a.taus.empty()) opt.taus = parse_taus_ms(a.taus, "--taus");
  opt.mode = a.mode == "physical" ? SimulationMode::PhysicalODE : SimulationMode::PaperConsistent;
  opt.moving_objects = !a.no_moving;
  opt.speed = a.speed;
  if (!(a.noise >= 0.0)) throw DomainError("--noise must be non-negative");

  GroundTruthBundle b = make_benchmark(opt);
  if (a.noise > 0.0) {
    // Noise level relative to the mean ideal intensity, known only after rendering.
    std::vector<FrameTiming> timings;
    for (const auto& f : b.film) timings.push_back(f.timing());
    b.noise_sigma = a.noise * mean_intensity(b.film);
    b.raw = synthesize_raw_video(b.film, timings, b.taus, b.mode, b.noise_sigma, b.seed);
  }
  io::write_bundle(b, a.out);

  io::RunReport r("simulate");
  r.set("seed", a.seed);
  r.set("mode", to_string(b.mode));
  r.set("frames", b.raw.size());
  r.set("width", b.raw.width());
  r.set("height", b.raw.height());
  r.set("fps", a.fps);
  r.set("exposures_ms", join(opt.exposures_ms));
  r.set("speed", a.speed);
  r.set("moving_objects", a.no_moving ? 0 : 1);
  r.set("noise_relative", a.noise);
  r.set("noise_sigma", b.noise_sigma);
  r.set("tau_h_s", b.taus.tau_h().count());
  r.set("tau_c_s", b.taus.tau_c().count());
  r.set("correspondences", b.correspondences.size());
  r.set("bundle_digest", io::directory_digest(a.out));
  emit(r, a.report, out);
}

// ---------------------------------------------------------------------------

struct CorrectArgs {
  std::string in;
  std::string prefix = "raw";
  std::string taus = "from-truth";
  std::string out;
  bool clamp = false;
  std::string report;
};

void cmd_correct(const CorrectArgs& a, std::ostream& out) {
  const fs::path in = a.in, dst = a.out;
  const VideoSequence raw = io::read_sequence(in, a.prefix);
  const TimeConstants taus = resolve_taus(a.taus, in);
  const VideoSequence corrected = correct_sequence(raw, taus);

  ensure_directory(dst);
  std::vector<FrameTiming> timings;
  for (const auto& f : corrected) timings.push_back(f.timing());
  io::write_manifest(dst / io::kManifest, timings);
  for (std::size_t k = 0; k < corrected.size(); ++k) {
    io::write_frame_plane(dst / io::frame_file("corrected", k, "irf"), corrected[k], io::PlanePrecision::Float32);
    if (a.clamp) io::write_frame_pgm(dst / io::frame_file("corrected", k, "pgm"), corrected[k]);
  }

  io::RunReport r("correct");
  r.set("input_digest", io::directory_digest(in));
  r.set("prefix", a.prefix);
  r.set("frames", corrected.size());
  r.set("tau_h_s", taus.tau_h().count());
  r.set("tau_c_s", taus.tau_c().count());
  r.set("clamp", a.clamp ? 1 : 0);
  // Against the ideal film when the input is a generated bundle. Frame 0 has
  // no predecessor to undo and is excluded.
  if (fs::exists(in / io::frame_file("film", 0, "irf"))) {
    const VideoSequence film = io::read_sequence(in, "film");
    double max_abs = 0.0, max_rel = 0.0;
    for (std::size_t k = 1; k < corrected.size(); ++k)
      for (std::size_t p = 0; p < corrected[k].size(); ++p) {
        const double e = std::abs(corrected[k].data()[p] - film[k].data()[p]);
        max_abs = std::max(max_abs, e);
        if (film[k].data()[p] != 0.0) max_rel = std::max(max_rel, e / std::abs(film[k].data()[p]));
      }
    r.set("max_abs_error", max_abs);
    r.set("max_rel_error", max_rel);
  }
  r.set("output_digest", io::directory_digest(dst));
  emit(r, a.report, out);
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string in;
  std::string prefix = "raw";
  std::string init = "10,10";
  std::size_t window = 8;
  bool whole = false;
  int max_iterations = 50;
  double damping = 1e-4;
  double gamma = 9.0;
  double weight_const = 50.0;
  std::string report;
};

void add_result(io::RunReport& r, const std::string& key, const EstimationResult& e) {
  r.set(key + "_tau_h_s", e.taus.tau_h().count());
  r.set(key + "_tau_c_s", e.taus.tau_c().count());
  r.set(key + "_iterations", e.iterations_used);
  r.set(key + "_converged", e.converged ? 1 : 0);
  r.set(key + "_energy", e.final_energy);
  r.set(key + "_condition_number", e.condition_number);
  r.set(key + "_energy_trace", join(e.energy_trace));
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path in = a.in;
  const VideoSequence raw = io::read_sequence(in, a.prefix);
  const auto corrs = io::read_correspondences(in / io::kCorrespondences);
  const TimeConstants init = parse_taus_ms(a.init, "--init");
  WindowConfig config;
  config.window_size = a.whole ? raw.size() : a.window;
  config.max_iterations = a.max_iterations;
  config.damping_init = a.damping;
  const RobustKernel kernel{a.gamma, a.weight_const};

  io::RunReport r("estimate");
  r.set("input_digest", io::directory_digest(in));
  r.set("prefix", a.prefix);
  r.set("init_tau_h_s", init.tau_h().count());
  r.set("init_tau_c_s", init.tau_c().count());
  r.set("gamma", a.gamma);
  r.set("weight_const", a.weight_const);
  r.set("damping_init", a.damping);
  r.set("correspondences", corrs.size());

  TimeConstants result = init;
  double worst_condition = 0.0;
  if (a.whole) {
    const EstimationResult e = estimate_time_constants(raw, corrs, init, config, kernel);
    r.set("mode", "whole");
    add_result(r, "whole", e);
    result = e.taus;
    worst_condition = e.condition_number;
  } else {
    const SlidingEstimate s = estimate_sliding_windows(raw, corrs, init, config, kernel);
    r.set("mode", "sliding");
    r.set("window_size", config.window_size);
    r.set("windows", s.windows.size());
    r.set("skipped_windows", s.skipped_windows);
    std::size_t converged = 0;
    for (std::size_t k = 0; k < s.windows.size(); ++k) {
      const auto& w = s.windows[k];
      const std::string key = fmt::format("window_{:03}", k);
      r.set(key + "_frames", fmt::format("{}-{}", w.first_frame, w.last_frame));
      r.set(key + "_correspondences", w.correspondences);
      add_result(r, key, w.result);
      converged += w.result.converged ? 1 : 0;
      worst_condition = std::max(worst_condition, w.result.condition_number);
    }
    r.set("converged_windows", converged);
    result = s.aggregate;
  }
  r.set("tau_h_s", result.tau_h().count());
  r.set("tau_c_s", result.tau_c().count());
  r.set("max_condition_number", worst_condition);
  const bool ill = !(worst_condition <= kIllConditioned);
  r.set("ill_conditioned", ill ? 1 : 0);
  if (fs::exists(in / io::kTruth)) {
    const auto truth = io::read_truth(in / io::kTruth);
    r.set("truth_tau_h_s", truth.taus.tau_h().count());
    r.set("truth_tau_c_s", truth.taus.tau_c().count());
    r.set("tau_h_rel_error", std::abs(result.tau_h() / truth.taus.tau_h() - 1.0));
    r.set("tau_c_rel_error", std::abs(result.tau_c() / truth.taus.tau_c() - 1.0));
  }
  if (ill)
    err << fmt::format(
        "warning: ill-conditioned estimate (condition number {} > {}); the exposure times do not vary "
        "enough to separate the heating and cooling constants\n",
        worst_condition, kIllConditioned);
  emit(r, a.report, out);
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string metric;
  std::string points;
  std::string truth;
  std::vector<std::string> merge;
  std::size_t sample = 1000;
  double slab = 0.2;
  std::uint64_t seed = 0;
  std::string a, b;
  std::string in;
  std::string prefix = "raw";
  std::string region;
  std::string report;
};

void add_stats(io::RunReport& r, const DeviationStats& s) {
  r.set("rmse", s.rmse);
  r.set("std", s.std);
  r.set("count", s.count);
}

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  io::RunReport r("evaluate");
  r.set("metric", a.metric);
  if (a.metric == "plane") {
    if (a.points.empty()) throw DomainError("plane metric needs --points");
    const auto pts = io::read_points(a.points);
    r.set("points_digest", io::file_digest(a.points));
    PlaneModel model;
    if (!a.truth.empty()) {
      model = io::read_truth(a.truth).plane;
      r.set("reference", "truth");
      r.set("truth_digest", io::file_digest(a.truth));
    } else if (!a.merge.empty()) {
      std::vector<std::vector<Point3>> clouds;
      for (const auto& m : a.merge) clouds.push_back(io::read_points(m));
      model = merged_reference_plane(clouds, a.sample, a.slab, a.seed);
      r.set("reference", "merged");
      r.set("merged_clouds", clouds.size());
      r.set("sample", a.sample);
      r.set("slab", a.slab);
      r.set("seed", a.seed);
    } else {
      model = fit_plane(pts);
      r.set("reference", "fit");
    }
    r.set("plane_nx", model.normal.x());
    r.set("plane_ny", model.normal.y());
    r.set("plane_nz", model.normal.z());
    r.set("plane_offset", model.offset);
    add_stats(r, deviation_stats(std::span<const Point3>(pts), model));
  } else if (a.metric == "line") {
    if (a.points.empty()) throw DomainError("line metric needs --points");
    const auto pts = io::read_trajectory(a.points).positions();
    r.set("points_digest", io::file_digest(a.points));
    LineModel model;
    if (!a.truth.empty()) {
      model = io::read_truth(a.truth).line;
      r.set("reference", "truth");
    } else {
      model = fit_line(pts);
      r.set("reference", "fit");
    }
    add_stats(r, deviation_stats(std::span<const Point3>(pts), model));
  } else if (a.metric == "frechet" || a.metric == "dtw" || a.metric == "mean-distance") {
    if (a.a.empty() || a.b.empty()) throw DomainError(a.metric + " needs --a and --b");
    const Trajectory ta = io::read_trajectory(a.a), tb = io::read_trajectory(a.b);
    if (ta.empty() || tb.empty()) throw FormatError("empty trajectory");
    r.set("a_digest", io::file_digest(a.a));
    r.set("b_digest", io::file_digest(a.b));
    if (a.metric == "frechet") {
      r.set("frechet", discrete_frechet(ta, tb));
    } else if (a.metric == "dtw") {
      r.set("dtw", dtw(ta, tb));
    } else {
      const MeanDistance m = mean_distance(ta, tb);
      r.set("mean_distance", m.mean);
      r.set("matched", m.matched);
      r.set("unmatched_a", m.unmatched_a);
      r.set("unmatched_b", m.unmatched_b);
    }
  } else if (a.metric == "stability") {
    if (a.in.empty() || a.region.empty()) throw DomainError("stability needs --in and --region");
    const auto v = parse_list(a.region, 4, "--region");
    for (double x : v)
      if (x != std::floor(x)) throw DomainError("--region takes integers x,y,w,h");
    const Region region{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
                        static_cast<int>(v[3])};
    const VideoSequence seq = io::read_sequence(a.in, a.prefix);
    r.set("input_digest", io::directory_digest(a.in));
    r.set("prefix", a.prefix);
    r.set("region", a.region);
    r.set("stability", intensity_stability(seq, region));
  } else {
    throw DomainError("unknown metric '" + a.metric + "'");
  }
  emit(r, a.report, out);
}

// ---------------------------------------------------------------------------

struct LiftArgs {
  std::string in;
  std::string frames;
  std::string prefix = "raw";
  std::string out;
  int label = kRoad;
  std::size_t every = 4;
  std::size_t targets = 2;
  double max_depth = 12.0;
  std::string report;
};

void cmd_lift(const LiftArgs& a, std::ostream& out) {
  const fs::path bundle = a.in;
  const fs::path frames_dir = a.frames.empty() ? bundle : fs::path(a.frames);
  const VideoSequence seq = io::read_sequence(frames_dir, a.prefix);
  const auto timings = io::read_manifest(bundle / io::kManifest);
  if (timings.size() != seq.size()) throw FormatError("frame count differs between bundle and --frames");
  const CameraSpec camera = io::read_camera(bundle / io::kCamera, timings);
  camera.validate();
  const auto labels = io::read_labels(bundle, seq.size());
  if (a.every == 0 || a.targets == 0) throw DomainError("--every and --targets must be positive");
  if (a.label < 0 || a.label > 255) throw DomainError("--label must be in [0, 255]");

  LiftOptions opt;
  opt.max_depth = a.max_depth;
  std::vector<std::size_t> refs;
  for (std::size_t i = 1; i + a.targets < seq.size(); i += a.every) refs.push_back(i);
  std::vector<std::vector<Point3>> lifted(refs.size());
  parallel_for(refs.size(), [&](std::size_t k) {
    std::vector<std::size_t> tg;
    for (std::size_t g = 1; g <= a.targets; ++g) tg.push_back(refs[k] + g);
    lifted[k] = lift_points(seq, camera, labels[refs[k]], static_cast<std::uint16_t>(a.label), refs[k], tg, opt);
  });
  std::vector<Point3> points;
  for (const auto& l : lifted) points.insert(points.end(), l.begin(), l.end());
  io::write_points(a.out, points);

  io::RunReport r("lift");
  r.set("input_digest", io::directory_digest(frames_dir));
  r.set("prefix", a.prefix);
  r.set("label", a.label);
  r.set("reference_frames", refs.size());
  r.set("targets", a.targets);
  r.set("max_depth", a.max_depth);
  r.set("points", points.size());
  r.set("points_digest", io::file_digest(a.out));
  emit(r, a.report, out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Microbolometer photometric correction toolkit", "irpc"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic ground-truth bundle");
  s->add_option("--seed", sim.seed, "Random seed");
  s->add_option("--out", sim.out, "Output directory")->required();
  s->add_option("--mode", sim.mode, "Sensor simulation: paper or physical")
      ->check(CLI::IsMember({"paper", "physical"}));
  s->add_option("--noise", sim.noise, "Gaussian noise sigma as a fraction of the mean ideal intensity");
  s->add_option("--exposures", sim.exposures, "Exposure times to draw from, ms (comma-separated)");
  s->add_option("--frames", sim.frames, "Number of frames");
  s->add_option("--fps", sim.fps, "Frame rate");
  s->add_option("--taus", sim.taus, "Override time constants: tau_h,tau_c in ms");
  s->add_option("--speed", sim.speed, "Camera speed, m/s (0 for a static camera)");
  s->add_flag("--no-moving", sim.no_moving, "Leave out the moving hot objects");
  s->add_option("--report", sim.report, "Also write the report to this file");

  CorrectArgs cor;
  auto* c = app.add_subcommand("correct", "Undo the sensor response on a frame sequence");
  c->add_option("--in", cor.in, "Bundle or directory with manifest.csv and frames")->required();
  c->add_option("--prefix", cor.prefix, "Frame file prefix");
  c->add_option("--taus", cor.taus, "from-truth, report:PATH, or tau_h,tau_c in ms");
  c->add_option("--out", cor.out, "Output directory")->required();
  c->add_flag("--clamp", cor.clamp, "Also write 16-bit graymaps clamped to the storage range");
  c->add_option("--report", cor.report, "Also write the report to this file");

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Estimate the time constants from correspondences");
  e->add_option("--in", est.in, "Bundle directory")->required();
  e->add_option("--prefix", est.prefix, "Frame file prefix");
  e->add_option("--init", est.init, "Initial tau_h,tau_c in ms");
  e->add_option("--window", est.window, "Frames per sliding window");
  e->add_flag("--whole", est.whole, "Single estimate over the whole sequence");
  e->add_option("--max-iterations", est.max_iterations, "Iteration cap per window");
  e->add_option("--damping", est.damping, "Initial damping (0 for plain Gauss-Newton)");
  e->add_option("--gamma", est.gamma, "Huber threshold");
  e->add_option("--weight-const", est.weight_const, "Gradient weighting constant");
  e->add_option("--report", est.report, "Also write the report to this file");

  EvaluateArgs ev;
  auto* v = app.add_subcommand("evaluate", "Compute an evaluation metric");
  v->add_option("--metric", ev.metric, "plane, line, frechet, dtw, mean-distance or stability")
      ->required()
      ->check(CLI::IsMember({"plane", "line", "frechet", "dtw", "mean-distance", "stability"}));
  v->add_option("--points", ev.points, "Points (x,y,z) for plane; trajectory (t,x,y[,z]) for line");
  v->add_option("--truth", ev.truth, "truth.csv providing the reference plane or line");
  v->add_option("--merge", ev.merge, "Point clouds to derive the reference plane from");
  v->add_option("--sample", ev.sample, "Points drawn per merged cloud");
  v->add_option("--slab", ev.slab, "Slab thickness around the coarse merged plane");
  v->add_option("--seed", ev.seed, "Sampling seed for --merge");
  v->add_option("--a", ev.a, "First trajectory");
  v->add_option("--b", ev.b, "Second trajectory");
  v->add_option("--in", ev.in, "Frame directory for stability");
  v->add_option("--prefix", ev.prefix, "Frame file prefix for stability");
  v->add_option("--region", ev.region, "Stability region x,y,w,h");
  v->add_option("--report", ev.report, "Also write the report to this file");

  LiftArgs lift;
  auto* l = app.add_subcommand("lift", "Reconstruct 3D points of one surface by multi-view depth search");
  l->add_option("--in", lift.in, "Bundle directory (camera, labels, manifest)")->required();
  l->add_option("--frames", lift.frames, "Directory holding the frames to use (default: --in)");
  l->add_option("--prefix", lift.prefix, "Frame file prefix");
  l->add_option("--out", lift.out, "Output points CSV")->required();
  l->add_option("--label", lift.label, "Surface label to lift (1 = road)");
  l->add_option("--every", lift.every, "Step between reference frames");
  l->add_option("--targets", lift.targets, "Following frames matched against each reference");
  l->add_option("--max-depth", lift.max_depth, "Far end of the depth search");
  l->add_option("--report", lift.report, "Also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  int status = kOk;
  try {
    if (*s) cmd_simulate(sim, out);
    else if (*c) cmd_correct(cor, out);
    else if (*e) status = cmd_estimate(est, out, err);
    else if (*v) cmd_evaluate(ev, out);
    else if (*l) cmd_lift(lift, out);
  } catch (const DegenerateDataError& ex) {
    err << "error: degenerate data: " << ex.what() << '\n';
    return kDegenerate;
  } catch (const DegenerateGeometryError& ex) {
    err << "error: degenerate data: " << ex.what() << '\n';
    return kDegenerate;
  } catch (const NoOverlapError& ex) {
    err << "error: degenerate data: " << ex.what() << '\n';
    return kDegenerate;
  } catch (const FormatError& ex) {
    err << "error: " << ex.what() << '\n';
    return kInputError;
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << '\n';
    return kInputError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kInvalid;
  }
  // Kept out of the report so reports stay bit-identical across runs.
  err << fmt::format("wall_time_s={:.3f}\n",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return status;
}

}  // namespace irpc::cli
