#include "handtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "handtrack/error.hpp"

namespace handtrack {

namespace {

// Stream values are 32-bit; generating them pre-rounded keeps in-memory and
// on-disk sequences identical. The volatile stops GCC 11's SLP vectorizer at
// -O3 from folding the narrowing away.
double f32(double v) {
  volatile float narrowed = static_cast<float>(v);
  return narrowed;
}

constexpr int kMaxPlacementTries = 10;
constexpr double kPlacementStepMm = 50.0;
constexpr double kMinDepthMm = 50.0;
constexpr double kImageMarginPx = 4.0;

bool placement_ok(const Camera& camera, const JointPositions& positions) {
  for (int j = 0; j < kNumJoints; ++j) {
    const Eigen::Vector3d p = positions.col(j);
    if (!(p.z() > kMinDepthMm)) return false;
    const Eigen::Vector2d uv = project(camera, p);
    if (uv.x() < kImageMarginPx || uv.y() < kImageMarginPx ||
        uv.x() > camera.width - 1 - kImageMarginPx || uv.y() > camera.height - 1 - kImageMarginPx) {
      return false;
    }
  }
  return true;
}

}  // namespace

double Sinusoid::at(int frame) const {
  return base + amplitude * std::sin(2.0 * std::numbers::pi * frame / period + phase);
}

void SynthConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (sequence_length < 0) throw Error(ErrorCode::kInvalidInput, "synth: negative sequence length");
  if (!prob(occlusion_rate) || !prob(heatmap_outlier_rate)) {
    throw Error(ErrorCode::kInvalidInput, "synth: rates must lie in [0, 1]");
  }
  if (!(heatmap_sigma > 0.0)) throw Error(ErrorCode::kInvalidInput, "synth: heatmap sigma must be positive");
  if (!(position_noise_mm >= 0.0) || !(root_noise_mm >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "synth: noise half-widths must be non-negative");
  }
  if (!(shape_scale >= 0.8 && shape_scale <= 1.2)) {
    throw Error(ErrorCode::kInvalidInput, "synth: shape scale must lie in [0.8, 1.2]");
  }
  if (heatmap_width <= 2 || heatmap_height <= 2) {
    throw Error(ErrorCode::kInvalidInput, "synth: heatmap grid too small");
  }
  for (const auto& s : motion) {
    if (!(s.period > 0.0)) throw Error(ErrorCode::kInvalidInput, "synth: motion periods must be positive");
  }
  for (const auto& s : root_trajectory) {
    if (!(s.period > 0.0)) throw Error(ErrorCode::kInvalidInput, "synth: trajectory periods must be positive");
  }
  if (!pose_trajectory.empty() && static_cast<int>(pose_trajectory.size()) < sequence_length) {
    throw Error(ErrorCode::kInvalidInput, "synth: pose trajectory shorter than the sequence");
  }
}

SynthConfig default_synth_config(const Skeleton& skeleton, std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> period(60.0, 140.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  const double base_rotation[3] = {-0.3, 0.2, 0.1};
  for (int d = 3; d < 6; ++d) {
    c.motion[d] = {base_rotation[d - 3], 0.2, period(rng), phase(rng)};
  }
  for (int i = 0; i < kNumAngles; ++i) {
    const int d = kNumGlobalDofs + i;
    const double lo = skeleton.limits_lower()[i];
    const double hi = skeleton.limits_upper()[i];
    if (skeleton.dofs()[d].kind == DofKind::kAbduction) {
      c.motion[d] = {0.5 * (lo + hi), 0.3 * (hi - lo), period(rng), phase(rng)};
    } else {
      // Flexion sweeps from near-straight to well curled.
      const double top = std::min(hi, 1.2);
      const double bottom = std::max(lo, 0.0);
      c.motion[d] = {0.5 * (bottom + top), 0.45 * (top - bottom), period(rng), phase(rng)};
    }
  }
  const double centre[3] = {0.0, 0.0, 550.0};
  const double amplitude[3] = {50.0, 25.0, 100.0};
  for (int k = 0; k < 3; ++k) c.root_trajectory[k] = {centre[k], amplitude[k], period(rng), phase(rng)};
  return c;
}

Heatmap gaussian_heatmap(int width, int height, double scale, double cx, double cy, double sigma,
                         double amplitude) {
  Heatmap h = Heatmap::zeros(width, height, scale);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      h.at(x, y) = static_cast<float>(amplitude * std::exp(-d2 * inv));
    }
  }
  return h;
}

SynthSequence generate_sequence(const Skeleton& base_skeleton, const Camera& camera,
                                const SynthConfig& config) {
  config.validate();
  camera.validate();

  std::array<double, kNumJoints> lengths{};
  for (int j = 1; j < kNumJoints; ++j) lengths[j] = base_skeleton.bone_length(j) * config.shape_scale;
  SynthSequence seq{{}, {}, base_skeleton.with_bone_lengths(lengths)};
  const Skeleton& sk = seq.skeleton;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto symmetric = [&](double half_width) { return half_width * (2.0 * unit(rng) - 1.0); };

  const double hm_scale = static_cast<double>(camera.width) / config.heatmap_width;
  const int root = sk.root_joint();

  for (int t = 0; t < config.sequence_length; ++t) {
    Pose pose;
    Eigen::Vector3d root_target = Eigen::Vector3d::Zero();
    const bool external = !config.pose_trajectory.empty();
    if (external) {
      pose = config.pose_trajectory[t];
    } else {
      for (int d = 3; d < kNumDofs; ++d) pose.params[d] = config.motion[d].at(t);
      pose.angles() = pose.angles().cwiseMax(sk.limits_lower()).cwiseMin(sk.limits_upper());
      for (int k = 0; k < 3; ++k) root_target[k] = config.root_trajectory[k].at(t);
    }

    JointPositions positions;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementTries && !placed; ++attempt) {
      Pose trial = pose;
      if (external) {
        trial.params[2] += attempt * kPlacementStepMm;
      } else {
        Pose unplaced = pose;
        unplaced.translation().setZero();
        const Eigen::Vector3d offset = forward_kinematics(sk, unplaced).col(root);
        trial.translation() =
            root_target + Eigen::Vector3d(0, 0, attempt * kPlacementStepMm) - offset;
      }
      for (int d = 0; d < kNumDofs; ++d) trial.params[d] = f32(trial.params[d]);
      positions = forward_kinematics(sk, trial);
      if (placement_ok(camera, positions)) {
        pose = trial;
        placed = true;
      }
    }
    if (!placed) {
      throw Error(ErrorCode::kGenerationFailure,
                  "synth: frame " + std::to_string(t) + " could not be placed in front of the camera");
    }

    Observation obs;
    const Eigen::Vector3d r_true = positions.col(root);
    const Eigen::Vector2d root_uv = project(camera, r_true);
    obs.root = {f32(root_uv.x()), f32(root_uv.y()), f32(r_true.z()), 1.0};
    for (int j = 0; j < kNumJoints; ++j) {
      for (int c = 0; c < 3; ++c) {
        obs.local_positions(c, j) = f32(positions(c, j) - r_true[c] + symmetric(config.position_noise_mm));
      }
    }
    for (int c = 0; c < 3; ++c) obs.root_3d[c] = f32(r_true[c] + symmetric(config.root_noise_mm));

    obs.valid.fill(true);
    for (int tip : joint::kFingertips) {
      if (unit(rng) < config.occlusion_rate) obs.valid[tip] = false;
    }
    obs.joint_heatmaps.reserve(kNumJoints);
    for (int j = 0; j < kNumJoints; ++j) {
      const Eigen::Vector2d uv = project(camera, positions.col(j)) / hm_scale;
      const double amplitude = obs.valid[j] ? 1.0 : kOccludedAmplitude;
      obs.joint_heatmaps.push_back(gaussian_heatmap(config.heatmap_width, config.heatmap_height,
                                                    hm_scale, uv.x(), uv.y(),
                                                    config.heatmap_sigma, amplitude));
    }

    // Outlier frames: the true blob fades and a weak spurious maximum appears
    // far away, as a localizer failing under occlusion would produce.
    const Eigen::Vector2d root_grid = root_uv / hm_scale;
    const bool outlier = unit(rng) < config.heatmap_outlier_rate;
    const double spurious_x = unit(rng) * (config.heatmap_width - 1);
    const double spurious_y = unit(rng) * (config.heatmap_height - 1);
    if (!outlier) {
      obs.root_heatmap = gaussian_heatmap(config.heatmap_width, config.heatmap_height, hm_scale,
                                          root_grid.x(), root_grid.y(), config.heatmap_sigma, 1.0);
    } else {
      Eigen::Vector2d spurious(spurious_x, spurious_y);
      // Reflect through the root when too close so the jump is always large.
      const double min_jump_cells = 60.0 / hm_scale;
      if ((spurious - root_grid).norm() < min_jump_cells) {
        Eigen::Vector2d far(root_grid.x() < config.heatmap_width / 2.0 ? config.heatmap_width - 1 : 0,
                            root_grid.y() < config.heatmap_height / 2.0 ? config.heatmap_height - 1 : 0);
        spurious = far;
      }
      Heatmap h = gaussian_heatmap(config.heatmap_width, config.heatmap_height, hm_scale,
                                   root_grid.x(), root_grid.y(), config.heatmap_sigma,
                                   kOccludedAmplitude);
      const Heatmap s = gaussian_heatmap(config.heatmap_width, config.heatmap_height, hm_scale,
                                         spurious.x(), spurious.y(), config.heatmap_sigma,
                                         kOutlierAmplitude);
      for (size_t i = 0; i < h.values.size(); ++i) h.values[i] = std::max(h.values[i], s.values[i]);
      obs.root_heatmap = std::move(h);
    }

    GroundTruth gt;
    gt.pose = pose;
    for (int j = 0; j < kNumJoints; ++j)
      for (int c = 0; c < 3; ++c) gt.positions(c, j) = f32(positions(c, j));
    seq.observations.push_back(std::move(obs));
    seq.ground_truth.push_back(std::move(gt));
  }
  return seq;
}

}  // namespace handtrack
