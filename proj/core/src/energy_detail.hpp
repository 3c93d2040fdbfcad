#pragma once

#include "handtrack/energy.hpp"

namespace handtrack::detail {

using PoseMatrix = Eigen::Matrix<double, kNumDofs, kNumDofs>;

struct WeightedEvaluation {
  double value = 0.0;
  PoseVector gradient = PoseVector::Zero();
  PoseMatrix gauss_newton = PoseMatrix::Zero();  // filled when requested
};

EnergyTerms evaluate_terms(const Skeleton& sk, const Pose& pose, const FittingTargets& targets,
                           const TrackerState& state, const Camera& camera,
                           const EnergyWeights* weights, PoseMatrix* gauss_newton);

WeightedEvaluation evaluate_weighted(const Skeleton& sk, const Pose& pose,
                                     const FittingTargets& targets, const TrackerState& state,
                                     const Camera& camera, const EnergyWeights& weights,
                                     bool want_gauss_newton);

}  // namespace handtrack::detail
