#include "handtrack/energy.hpp"

#include <cmath>
#include <limits>

#include "energy_detail.hpp"
#include "handtrack/error.hpp"

namespace handtrack {

void EnergyWeights::validate() const {
  for (double w : {pos3d, pos2d, limits, temporal}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidInput, "energy weights must be finite and non-negative");
    }
  }
}

FittingTargets FittingTargets::from_observation(const Observation& obs) {
  FittingTargets t;
  t.positions = obs.global_positions();
  t.valid = obs.valid;
  if (obs.joint_heatmaps.size() != static_cast<size_t>(kNumJoints)) {
    throw Error(ErrorCode::kInvalidInput, "observation must carry 21 joint heatmaps");
  }
  for (int j = 0; j < kNumJoints; ++j) {
    if (!t.valid[j]) continue;
    const HeatmapPeak p = refined_peak(obs.joint_heatmaps[j]);
    t.maxima.col(j) = Eigen::Vector2d(p.u, p.v);
  }
  return t;
}

namespace detail {

EnergyTerms evaluate_terms(const Skeleton& sk, const Pose& pose, const FittingTargets& targets,
                           const TrackerState& state, const Camera& camera,
                           const EnergyWeights* weights, PoseMatrix* gn) {
  bool any_valid = false;
  for (bool b : targets.valid) any_valid = any_valid || b;
  if (!any_valid) throw Error(ErrorCode::kNoData, "energy: no valid joint in the observation");

  const KinematicsResult fk = forward_kinematics_with_jacobian(sk, pose);
  EnergyTerms terms;
  const double w3 = weights ? weights->pos3d : 1.0;
  const double w2 = weights ? weights->pos2d : 1.0;

  bool behind = false;
  for (int j = 0; j < kNumJoints; ++j) {
    if (!targets.valid[j]) continue;
    const auto jac = fk.jacobian.middleRows<3>(3 * j);
    const Eigen::Vector3d p = fk.positions.col(j);

    const Eigen::Vector3d r3 = p - targets.positions.col(j);
    terms.pos3d.value += r3.squaredNorm();
    terms.pos3d.gradient.noalias() += 2.0 * jac.transpose() * r3;
    if (gn && w3 > 0.0) gn->noalias() += 2.0 * w3 * jac.transpose() * jac;

    if (!(p.z() > 0.0)) {
      behind = true;
      continue;
    }
    const double iz = 1.0 / p.z();
    Eigen::Matrix<double, 2, 3> dproj;
    dproj << camera.fx * iz, 0.0, -camera.fx * p.x() * iz * iz,
             0.0, camera.fy * iz, -camera.fy * p.y() * iz * iz;
    const Eigen::Vector2d uv(camera.fx * p.x() * iz + camera.cx, camera.fy * p.y() * iz + camera.cy);
    const Eigen::Vector2d r2 = uv - targets.maxima.col(j);
    const Eigen::Matrix<double, 2, kNumDofs> jac2 = dproj * jac;
    terms.pos2d.value += r2.squaredNorm();
    terms.pos2d.gradient.noalias() += 2.0 * jac2.transpose() * r2;
    if (gn && w2 > 0.0) gn->noalias() += 2.0 * w2 * jac2.transpose() * jac2;
  }
  if (behind) {
    terms.pos2d.value = std::numeric_limits<double>::infinity();
    terms.pos2d.gradient.setZero();
  }

  // One-sided quadratic outside [lower, upper].
  const double wl = weights ? weights->limits : 1.0;
  for (int i = 0; i < kNumAngles; ++i) {
    const double theta = pose.params[kNumGlobalDofs + i];
    double excess = 0.0;
    if (theta < sk.limits_lower()[i]) excess = theta - sk.limits_lower()[i];
    if (theta > sk.limits_upper()[i]) excess = theta - sk.limits_upper()[i];
    if (excess == 0.0) continue;
    terms.limits.value += excess * excess;
    terms.limits.gradient[kNumGlobalDofs + i] = 2.0 * excess;
    if (gn) (*gn)(kNumGlobalDofs + i, kNumGlobalDofs + i) += 2.0 * wl;
  }

  // Penalizes the change of velocity: (theta - prev) - (prev - prev2).
  if (state.temporal_active()) {
    const PoseVector accel = pose.params - 2.0 * state.theta_prev.params + state.theta_prev2.params;
    terms.temporal.value = accel.squaredNorm();
    terms.temporal.gradient = 2.0 * accel;
    if (gn && weights) gn->diagonal().array() += 2.0 * weights->temporal;
  }
  return terms;
}

WeightedEvaluation evaluate_weighted(const Skeleton& sk, const Pose& pose,
                                     const FittingTargets& targets, const TrackerState& state,
                                     const Camera& camera, const EnergyWeights& weights,
                                     bool want_gauss_newton) {
  WeightedEvaluation out;
  const EnergyTerms t = evaluate_terms(sk, pose, targets, state, camera, &weights,
                                       want_gauss_newton ? &out.gauss_newton : nullptr);
  // A zero weight switches a term off entirely, including an infinite 2D value.
  auto add = [&](double w, const TermValue& term) {
    if (w == 0.0) return;
    out.value += w * term.value;
    out.gradient += w * term.gradient;
  };
  add(weights.pos3d, t.pos3d);
  add(weights.pos2d, t.pos2d);
  add(weights.limits, t.limits);
  add(weights.temporal, t.temporal);
  return out;
}

}  // namespace detail

EnergyTerms energy_terms(const Skeleton& skeleton, const Pose& pose, const FittingTargets& targets,
                         const TrackerState& state, const Camera& camera) {
  return detail::evaluate_terms(skeleton, pose, targets, state, camera, nullptr, nullptr);
}

TermValue energy(const Skeleton& skeleton, const Pose& pose, const FittingTargets& targets,
                 const TrackerState& state, const Camera& camera, const EnergyWeights& weights) {
  const auto e = detail::evaluate_weighted(skeleton, pose, targets, state, camera, weights, false);
  return {e.value, e.gradient};
}

TermValue energy(const Skeleton& skeleton, const Pose& pose, const Observation& obs,
                 const TrackerState& state, const Camera& camera, const EnergyWeights& weights) {
  return energy(skeleton, pose, FittingTargets::from_observation(obs), state, camera, weights);
}

}  // namespace handtrack
