#pragma once

#include "handtrack/camera.hpp"
#include "handtrack/energy.hpp"
#include "handtrack/observation.hpp"
#include "handtrack/skeleton.hpp"

namespace handtrack {

/// How the gradient is conditioned before each descent step.
enum class Conditioning {
  // Fixed diagonal scales per parameter type.
  kFixedScales,
  // Inverse of the damped Gauss-Newton matrix of the data terms plus the
  // curvature of the active regularizers.
  kGaussNewton,
};

struct DescentOptions {
  int iterations = 20;
  int max_halvings = 8;
  Conditioning conditioning = Conditioning::kGaussNewton;
  double translation_scale = 1.0;
  double angle_scale = 1e-4;  // global rotation and joint angles
  double damping = 1e-4;      // relative to the Gauss-Newton diagonal
};

struct FitResult {
  Pose pose;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  int accepted_steps = 0;
};

/// Runs `options.iterations` conditioned descent steps from `init`. Each step
/// backtracks by halving until the energy does not increase; the returned
/// energy never exceeds the initial one.
FitResult optimize_pose(const Skeleton& skeleton, const FittingTargets& targets,
                        const TrackerState& state, const Camera& camera,
                        const EnergyWeights& weights, const Pose& init,
                        const DescentOptions& options = {});

FitResult optimize_pose(const Skeleton& skeleton, const Observation& obs, const TrackerState& state,
                        const Camera& camera, const EnergyWeights& weights, const Pose& init,
                        const DescentOptions& options = {});

/// Rest-pose angles with the global translation placing the root joint at `root_3d`.
Pose initial_pose(const Skeleton& skeleton, const Eigen::Vector3d& root_3d);

struct TrackResult {
  Pose pose;
  TrackerState state;
  bool coasted = false;
  double energy = 0.0;
};

/// One tracking step: warm start from the previous pose (or initial_pose on
/// the first frame), optimize, shift the history. Frames without usable data
/// coast on the previous pose.
TrackResult track_frame(const Skeleton& skeleton, const Observation& obs, const TrackerState& state,
                        const Camera& camera, const EnergyWeights& weights,
                        const DescentOptions& options = {});

}  // namespace handtrack
