#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "handtrack/camera.hpp"
#include "handtrack/observation.hpp"
#include "handtrack/skeleton.hpp"

namespace handtrack {

struct Sinusoid {
  double base = 0.0;
  double amplitude = 0.0;
  double period = 100.0;  // frames
  double phase = 0.0;     // rad

  double at(int frame) const;
};

struct SynthConfig {
  int sequence_length = 200;
  // Entries 3..25 drive global rotation and joint angles; 0..2 are ignored
  // because translation follows root_trajectory.
  std::array<Sinusoid, kNumDofs> motion{};
  // Position of the root joint (middle MCP) in camera coordinates, mm.
  std::array<Sinusoid, 3> root_trajectory{};
  // When non-empty, replaces motion and root_trajectory frame by frame.
  std::vector<Pose> pose_trajectory;

  double position_noise_mm = 25.0;  // per-joint uniform half-width
  double root_noise_mm = 25.0;      // uniform half-width on r
  double occlusion_rate = 0.0;      // per fingertip per frame
  double heatmap_sigma = 2.0;       // heatmap px
  double heatmap_outlier_rate = 0.0;
  double shape_scale = 1.0;  // beta, isotropic bone scaling
  int heatmap_width = 40;
  int heatmap_height = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Seed-derived limit-respecting motion and a root path roughly 550 mm in
/// front of the camera.
SynthConfig default_synth_config(const Skeleton& skeleton, std::uint64_t seed);

struct GroundTruth {
  Pose pose;
  JointPositions positions = JointPositions::Zero();
};

struct SynthSequence {
  std::vector<Observation> observations;
  std::vector<GroundTruth> ground_truth;
  Skeleton skeleton;  // the beta-scaled skeleton that produced the ground truth
};

inline constexpr double kOccludedAmplitude = 0.05;
inline constexpr double kOutlierAmplitude = 0.08;

/// Renders `amplitude * exp(-d^2 / (2 sigma^2))` around (cx, cy) in grid units.
Heatmap gaussian_heatmap(int width, int height, double scale, double cx, double cy, double sigma,
                         double amplitude);

SynthSequence generate_sequence(const Skeleton& skeleton, const Camera& camera,
                                const SynthConfig& config);

struct ObservationStream {
  Camera camera;
  int heatmap_width = 0;
  int heatmap_height = 0;
  double heatmap_scale = 1.0;
  std::vector<Observation> observations;
  std::vector<std::optional<GroundTruth>> ground_truth;  // one slot per frame

  bool has_ground_truth() const;
};

inline constexpr std::uint32_t kObservationStreamVersion = 1;

/// `ground_truth` is either empty or one entry per observation.
void write_observation_stream(const std::filesystem::path& path,
                              std::span<const Observation> observations,
                              std::span<const GroundTruth> ground_truth, const Camera& camera);

/// Throws a format error when `expected_camera` is given and differs from the header.
ObservationStream read_observation_stream(const std::filesystem::path& path,
                                          const Camera* expected_camera = nullptr);

}  // namespace handtrack
