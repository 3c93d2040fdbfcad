#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "handtrack/camera.hpp"
#include "handtrack/config_io.hpp"
#include "handtrack/error.hpp"
#include "handtrack/eval.hpp"
#include "handtrack/gradcheck.hpp"
#include "handtrack/localization.hpp"
#include "handtrack/optimizer.hpp"
#include "handtrack/skeleton.hpp"
#include "handtrack/synth.hpp"

namespace handtrack::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kEnvPrefix = "HANDTRACK_";
constexpr double kGradCheckTolerance = 1e-4;

struct RunConfig {
  std::string skeleton_path;
  std::string camera_path;
  std::string weights_path;
  std::string stream_path;
  std::string frames_path;
  std::string poses_path;
  std::string out_dir = ".";
  std::uint64_t seed = 42;

  std::optional<double> w_p3, w_p2, w_l, w_t;
  double delta = 0.98;
  double conf_threshold = 0.1;
  double jump_threshold = 30.0;
  std::optional<double> k_crop;
  int iterations = 20;
  std::string conditioning = "gauss-newton";

  int frames = 200;
  double noise_mm = 25.0;
  std::optional<double> root_noise_mm;
  double occlusion_rate = 0.1;
  double outlier_rate = 0.0;
  double shape_scale = 1.0;
  bool no_ground_truth = false;

  std::vector<std::string> variants;
  int configurations = 100;
};

std::string env(const std::string& name) { return std::string(kEnvPrefix) + name; }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat: return kFormat;
    case ErrorCode::kVersionMismatch: return kVersionMismatch;
    case ErrorCode::kMissingGroundTruth: return kMissingGroundTruth;
    case ErrorCode::kIo: return kIo;
    case ErrorCode::kGenerationFailure: return kGenerationFailure;
    case ErrorCode::kNoData: return kNoData;
    default: return kInvalidInput;
  }
}

Skeleton skeleton_of(const RunConfig& c) {
  return c.skeleton_path.empty() ? default_skeleton() : load_skeleton(c.skeleton_path);
}

Camera camera_of(const RunConfig& c) { return c.camera_path.empty() ? Camera{} : load_camera(c.camera_path); }

EnergyWeights weights_of(const RunConfig& c) {
  EnergyWeights w = c.weights_path.empty() ? EnergyWeights{} : load_weights(c.weights_path);
  if (c.w_p3) w.pos3d = *c.w_p3;
  if (c.w_p2) w.pos2d = *c.w_p2;
  if (c.w_l) w.limits = *c.w_l;
  if (c.w_t) w.temporal = *c.w_t;
  w.validate();
  return w;
}

DescentOptions descent_of(const RunConfig& c) {
  DescentOptions o;
  o.iterations = c.iterations;
  if (c.conditioning == "fixed-scales") o.conditioning = Conditioning::kFixedScales;
  return o;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "cannot create output directory '" + dir.string() + "'");
  }
}

ObservationStream load_stream(const RunConfig& c, const Camera* camera) {
  if (c.stream_path.empty()) throw Error(ErrorCode::kInvalidInput, "--stream is required");
  return read_observation_stream(c.stream_path, camera);
}

std::vector<JointPositions> truth_positions(const ObservationStream& s) {
  if (!s.has_ground_truth()) {
    throw Error(ErrorCode::kMissingGroundTruth, "observation stream carries no ground truth");
  }
  std::vector<JointPositions> truth;
  for (const auto& g : s.ground_truth) truth.push_back(g->positions);
  return truth;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// --- synth ---------------------------------------------------------------

int cmd_synth(const RunConfig& c, std::ostream& out) {
  const Skeleton sk = skeleton_of(c);
  const Camera cam = camera_of(c);
  SynthConfig cfg = default_synth_config(sk, c.seed);
  cfg.sequence_length = c.frames;
  cfg.position_noise_mm = c.noise_mm;
  cfg.root_noise_mm = c.root_noise_mm.value_or(c.noise_mm);
  cfg.occlusion_rate = c.occlusion_rate;
  cfg.heatmap_outlier_rate = c.outlier_rate;
  cfg.shape_scale = c.shape_scale;
  const SynthSequence seq = generate_sequence(sk, cam, cfg);

  fs::path path = c.stream_path;
  if (path.empty()) {
    ensure_dir(c.out_dir);
    path = fs::path(c.out_dir) / "observations.htobs";
  }
  std::span<const GroundTruth> gt;
  if (!c.no_ground_truth) gt = seq.ground_truth;
  write_observation_stream(path, seq.observations, gt, cam);
  out << "synth: wrote " << seq.observations.size() << " frames to " << path.string() << "\n";
  return kOk;
}

// --- track ---------------------------------------------------------------

struct StageTimer {
  std::vector<double> samples_ms;
  void add(std::chrono::steady_clock::duration d) {
    samples_ms.push_back(std::chrono::duration<double, std::milli>(d).count());
  }
};

void write_line(std::ofstream& f, const std::string& line, const fs::path& path) {
  // One write per record so a failure never leaves a partial frame behind.
  f.write(line.data(), static_cast<std::streamsize>(line.size()));
  f.flush();
  if (!f) throw Error(ErrorCode::kIo, "write failed on '" + path.string() + "'");
}

int cmd_track(const RunConfig& c, std::ostream& out) {
  const Skeleton sk = skeleton_of(c);
  const Camera cam = camera_of(c);
  const EnergyWeights weights = weights_of(c);
  const DescentOptions opts = descent_of(c);
  const ObservationStream stream = load_stream(c, c.camera_path.empty() ? nullptr : &cam);
  const Camera& stream_cam = stream.camera;
  const Variant variant = c.variants.empty() ? Variant::kFull : variant_from_string(c.variants.front());

  std::optional<FrameStream> frames;
  if (!c.frames_path.empty()) {
    frames = read_frame_stream(c.frames_path);
    if (frames->frames.size() != stream.observations.size()) {
      throw Error(ErrorCode::kInvalidInput, "frame stream length differs from the observation stream");
    }
  }

  ensure_dir(c.out_dir);
  const fs::path poses_path = fs::path(c.out_dir) / "poses.csv";
  const fs::path roots_path = fs::path(c.out_dir) / "roots.csv";
  std::ofstream poses(poses_path, std::ios::trunc);
  std::ofstream roots(roots_path, std::ios::trunc);
  if (!poses || !roots) throw Error(ErrorCode::kIo, "cannot open outputs in '" + c.out_dir + "'");

  std::string header = "frame,coasted";
  for (int d = 0; d < kNumDofs; ++d) header += ",theta_" + std::to_string(d);
  for (int j = 0; j < kNumJoints; ++j) {
    for (const char* axis : {"x", "y", "z"}) header += ",j" + std::to_string(j) + "_" + axis;
  }
  write_line(poses, header + "\n", poses_path);
  write_line(roots, "frame,u,v,z,likelihood,confident\n", roots_path);

  LocalizerState loc;
  loc.config = {c.delta, c.conf_threshold, c.jump_threshold};
  CropOptions crop_opts;
  crop_opts.k_crop = c.k_crop;
  TrackerState state;
  StageTimer t_loc, t_crop, t_track;

  for (size_t i = 0; i < stream.observations.size(); ++i) {
    const Observation& obs = stream.observations[i];

    auto t0 = std::chrono::steady_clock::now();
    const RootUpdate ru = update_root(loc, obs.root_heatmap);
    loc = ru.state;
    RootLocation root = ru.root;
    root.z = obs.root.z;
    t_loc.add(std::chrono::steady_clock::now() - t0);

    if (frames) {
      t0 = std::chrono::steady_clock::now();
      try {
        root.z = root_depth_lookup(frames->frames[i], root.u, root.v);
        (void)crop(frames->frames[i], root, frames->camera, crop_opts);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDepthHole) throw;
      }
      t_crop.add(std::chrono::steady_clock::now() - t0);
    }

    std::string line = std::to_string(i);
    t0 = std::chrono::steady_clock::now();
    if (variant == Variant::kRawPredictions) {
      line += ",0";
      for (int d = 0; d < kNumDofs; ++d) line += ",nan";
      const JointPositions p = obs.global_positions();
      for (int j = 0; j < kNumJoints; ++j)
        for (int k = 0; k < 3; ++k) line += "," + fmt(p(k, j));
    } else {
      const TrackResult r = track_frame(sk, obs, state, stream_cam, weights_for(variant, weights), opts);
      state = r.state;
      const JointPositions p = forward_kinematics(sk, r.pose);
      line += r.coasted ? ",1" : ",0";
      for (int d = 0; d < kNumDofs; ++d) line += "," + fmt(r.pose.params[d]);
      for (int j = 0; j < kNumJoints; ++j)
        for (int k = 0; k < 3; ++k) line += "," + fmt(p(k, j));
    }
    t_track.add(std::chrono::steady_clock::now() - t0);
    write_line(poses, line + "\n", poses_path);
    write_line(roots,
               std::to_string(i) + "," + fmt(root.u) + "," + fmt(root.v) + "," + fmt(root.z) + "," +
                   fmt(root.confidence) + "," + (ru.confident ? "1" : "0") + "\n",
               roots_path);
  }

  const fs::path timing_path = fs::path(c.out_dir) / "timing.csv";
  std::ofstream timing(timing_path, std::ios::trunc);
  if (!timing) throw Error(ErrorCode::kIo, "cannot write '" + timing_path.string() + "'");
  timing << "stage,frames,mean_ms,max_ms,total_ms\n";
  auto report = [&](const char* name, const StageTimer& t) {
    if (t.samples_ms.empty()) return;
    const auto stats = summarize(t.samples_ms);
    double total = 0.0, mx = 0.0;
    for (double s : t.samples_ms) {
      total += s;
      mx = std::max(mx, s);
    }
    timing << name << ',' << t.samples_ms.size() << ',' << fmt(stats.mean) << ',' << fmt(mx) << ','
           << fmt(total) << '\n';
    out << "  " << name << ": mean " << fmt(stats.mean) << " ms, max " << fmt(mx) << " ms\n";
  };
  out << "track: " << stream.observations.size() << " frames (" << to_string(variant) << ")\n";
  report("localization", t_loc);
  report("crop", t_crop);
  report("pose_tracking", t_track);
  return kOk;
}

// --- eval ----------------------------------------------------------------

std::vector<JointPositions> read_pose_positions(const fs::path& path, size_t expected) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open poses file '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<JointPositions> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    const size_t want = 2 + kNumDofs + 3 * kNumJoints;
    if (cells.size() != want) {
      throw Error(ErrorCode::kFormat, path.string() + ": expected " + std::to_string(want) + " columns");
    }
    JointPositions p;
    for (int j = 0; j < kNumJoints; ++j) {
      for (int k = 0; k < 3; ++k) {
        try {
          p(k, j) = std::stod(cells[2 + kNumDofs + 3 * j + k]);
        } catch (const std::exception&) {
          throw Error(ErrorCode::kFormat, path.string() + ": bad number in poses file");
        }
      }
    }
    out.push_back(p);
  }
  if (out.size() != expected) {
    throw Error(ErrorCode::kFormat, path.string() + ": has " + std::to_string(out.size()) +
                                        " frames, stream has " + std::to_string(expected));
  }
  return out;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const ObservationStream stream = load_stream(c, nullptr);
  const auto truth = truth_positions(stream);
  const fs::path poses = c.poses_path.empty() ? fs::path(c.out_dir) / "poses.csv" : fs::path(c.poses_path);
  const auto predicted = read_pose_positions(poses, truth.size());
  const MetricReport report = evaluate_sequence(stream.camera, predicted, truth);
  ensure_dir(c.out_dir);
  write_per_frame_csv(fs::path(c.out_dir) / "per_frame_errors.csv", report);
  write_curve_csv(fs::path(c.out_dir) / "threshold_curve.csv", report);
  write_summary_csv(fs::path(c.out_dir) / "summary.csv", report);
  out << "eval: mean 3D " << fmt(report.summary_3d.mean) << " mm, fingertip "
      << fmt(report.summary_fingertip.mean) << " mm, 2D " << fmt(report.summary_2d.mean) << " px\n";
  return kOk;
}

// --- ablate --------------------------------------------------------------

int cmd_ablate(const RunConfig& c, std::ostream& out) {
  const Skeleton sk = skeleton_of(c);
  const EnergyWeights weights = weights_of(c);
  const ObservationStream stream = load_stream(c, nullptr);
  const auto truth = truth_positions(stream);
  std::vector<Variant> variants;
  for (const auto& v : c.variants) variants.push_back(variant_from_string(v));
  if (variants.empty()) variants = all_variants();

  const auto rows = ablation_report(sk, stream.camera, stream.observations, truth, weights, variants,
                                    descent_of(c));
  ensure_dir(c.out_dir);
  const std::string name = fs::path(c.stream_path).stem().string();
  write_ablation_csv(fs::path(c.out_dir) / "ablation.csv", name, rows);
  out << "variant      fingertip_mm  joint_mm  jitter_mm\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-12s %12.3f %9.3f %10.3f\n", to_string(r.variant).c_str(),
                  r.fingertip_error_mm, r.joint_error_mm, r.jitter_mm);
    out << buf;
  }
  return kOk;
}

// --- gradcheck -----------------------------------------------------------

int cmd_gradcheck(const RunConfig& c, std::ostream& out) {
  const GradCheckReport r =
      run_gradient_check(skeleton_of(c), camera_of(c), weights_of(c), c.configurations, c.seed);
  out << "gradcheck: " << r.configurations << " configurations\n"
      << "  pos3d    " << fmt(r.pos3d) << "\n"
      << "  pos2d    " << fmt(r.pos2d) << "\n"
      << "  limits   " << fmt(r.limits) << "\n"
      << "  temporal " << fmt(r.temporal) << "\n"
      << "  total    " << fmt(r.total) << "\n"
      << "max relative error " << fmt(r.worst()) << "\n";
  return r.worst() < kGradCheckTolerance ? kOk : kGradCheckFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kinematic hand-pose tracking: synthetic streams, tracking, evaluation"};
  app.require_subcommand(1);
  RunConfig c;

  auto file_opt = [&](CLI::App* sub, const char* flag, std::string& dst, const char* env_name,
                      const char* help) { sub->add_option(flag, dst, help)->envname(env(env_name)); };

  auto add_common = [&](CLI::App* sub) {
    file_opt(sub, "--skeleton", c.skeleton_path, "SKELETON", "Skeleton config (JSON)");
    file_opt(sub, "--camera", c.camera_path, "CAMERA", "Camera config (JSON)");
    sub->add_option("--out", c.out_dir, "Output directory")->envname(env("OUT"));
    sub->add_option("--seed", c.seed, "Random seed")->envname(env("SEED"));
  };
  auto add_weights = [&](CLI::App* sub) {
    file_opt(sub, "--weights", c.weights_path, "WEIGHTS", "Energy weights config (JSON)");
    sub->add_option("--w-p3", c.w_p3, "3D position term weight (0.01)")->envname(env("W_P3"));
    sub->add_option("--w-p2", c.w_p2, "2D heatmap term weight (5e-7)")->envname(env("W_P2"));
    sub->add_option("--w-l", c.w_l, "Joint limit weight (0.03)")->envname(env("W_L"));
    sub->add_option("--w-t", c.w_t, "Temporal weight (1e-3)")->envname(env("W_T"));
    sub->add_option("--iterations", c.iterations, "Descent iterations per frame")
        ->check(CLI::PositiveNumber);
    sub->add_option("--conditioning", c.conditioning, "gauss-newton | fixed-scales")
        ->check(CLI::IsMember({"gauss-newton", "fixed-scales"}));
  };
  const std::vector<std::string> variant_names = {"full", "3d-only", "2d-only", "raw"};

  auto* synth = app.add_subcommand("synth", "Generate a synthetic observation stream");
  add_common(synth);
  synth->add_option("--stream", c.stream_path, "Output stream path (default <out>/observations.htobs)");
  synth->add_option("--frames", c.frames, "Sequence length")->check(CLI::NonNegativeNumber);
  synth->add_option("--noise-mm", c.noise_mm, "Uniform noise half-width on joints and root, mm");
  synth->add_option("--root-noise-mm", c.root_noise_mm, "Root noise half-width override, mm");
  synth->add_option("--occlusion-rate", c.occlusion_rate, "Per-fingertip occlusion probability")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--outlier-rate", c.outlier_rate, "Root heatmap outlier probability")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--shape-scale", c.shape_scale, "Isotropic bone scale beta")->check(CLI::Range(0.8, 1.2));
  synth->add_flag("--no-ground-truth", c.no_ground_truth, "Omit ground truth records");

  auto* track = app.add_subcommand("track", "Track an observation stream");
  add_common(track);
  add_weights(track);
  track->add_option("--stream", c.stream_path, "Observation stream")->required()->envname(env("STREAM"));
  track->add_option("--frame-stream", c.frames_path, "Optional RGB-D frame stream for depth lookup and cropping");
  track->add_option("--variant", c.variants, "Energy variant")->check(CLI::IsMember(variant_names))->expected(0, 1);
  track->add_option("--delta", c.delta, "Root extrapolation decay (0.98)")->check(CLI::Range(1e-9, 1.0));
  track->add_option("--conf-threshold", c.conf_threshold, "Root likelihood threshold (0.1)");
  track->add_option("--jump-threshold", c.jump_threshold, "Root jump threshold, px (30)");
  track->add_option("--k-crop", c.k_crop, "Crop side numerator, px*mm (default fx*300)");

  auto* eval = app.add_subcommand("eval", "Evaluate tracked poses against ground truth");
  add_common(eval);
  eval->add_option("--stream", c.stream_path, "Observation stream with ground truth")->required()->envname(env("STREAM"));
  eval->add_option("--poses", c.poses_path, "Tracked poses CSV (default <out>/poses.csv)");

  auto* ablate = app.add_subcommand("ablate", "Compare energy variants on one stream");
  add_common(ablate);
  add_weights(ablate);
  ablate->add_option("--stream", c.stream_path, "Observation stream with ground truth")->required()->envname(env("STREAM"));
  ablate->add_option("--variant", c.variants, "Variants to run (repeatable; default all)")
      ->check(CLI::IsMember(variant_names));

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the energy gradient");
  add_common(grad);
  add_weights(grad);
  grad->add_option("--configs", c.configurations, "Random configurations")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(c, out);
    if (track->parsed()) return cmd_track(c, out);
    if (eval->parsed()) return cmd_eval(c, out);
    if (ablate->parsed()) return cmd_ablate(c, out);
    if (grad->parsed()) return cmd_gradcheck(c, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error [unexpected]: " << e.what() << "\n";
    return kUnexpected;
  }
  return kUsage;
}

}  // namespace handtrack::cli
