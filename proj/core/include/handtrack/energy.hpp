#pragma once

#include <array>

#include <Eigen/Core>

#include "handtrack/camera.hpp"
#include "handtrack/observation.hpp"
#include "handtrack/skeleton.hpp"

namespace handtrack {

struct EnergyWeights {
  double pos3d = 0.01;
  double pos2d = 5e-7;
  double limits = 0.03;
  double temporal = 1e-3;

  void validate() const;
};

/// Pose history threaded through tracking. `history` counts how many of the
/// two previous poses are meaningful (0, 1 or 2).
struct TrackerState {
  Pose theta_prev;
  Pose theta_prev2;
  int frame_index = 0;
  int history = 0;

  bool temporal_active() const { return history >= 2; }
};

/// Per-frame constants of the data terms: global 3D targets, 2D heatmap
/// maxima and the joint validity mask.
struct FittingTargets {
  JointPositions positions = JointPositions::Zero();
  Eigen::Matrix<double, 2, kNumJoints> maxima = Eigen::Matrix<double, 2, kNumJoints>::Zero();
  std::array<bool, kNumJoints> valid{};

  static FittingTargets from_observation(const Observation& obs);
};

struct TermValue {
  double value = 0.0;
  PoseVector gradient = PoseVector::Zero();
};

// Unweighted terms. pos2d is +inf (with zero gradient) if a valid joint is at z <= 0.
struct EnergyTerms {
  TermValue pos3d;
  TermValue pos2d;
  TermValue limits;
  TermValue temporal;
};

EnergyTerms energy_terms(const Skeleton& skeleton, const Pose& pose, const FittingTargets& targets,
                         const TrackerState& state, const Camera& camera);

TermValue energy(const Skeleton& skeleton, const Pose& pose, const FittingTargets& targets,
                 const TrackerState& state, const Camera& camera, const EnergyWeights& weights);

TermValue energy(const Skeleton& skeleton, const Pose& pose, const Observation& obs,
                 const TrackerState& state, const Camera& camera, const EnergyWeights& weights);

}  // namespace handtrack
