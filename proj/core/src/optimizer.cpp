#include "handtrack/optimizer.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "energy_detail.hpp"
#include "handtrack/error.hpp"

namespace handtrack {

namespace {

PoseVector descent_direction(const detail::WeightedEvaluation& e, const DescentOptions& options) {
  if (options.conditioning == Conditioning::kFixedScales) {
    PoseVector scales;
    scales.head<3>().setConstant(options.translation_scale);
    scales.tail<kNumDofs - 3>().setConstant(options.angle_scale);
    return -(scales.array() * e.gradient.array()).matrix();
  }
  detail::PoseMatrix h = e.gauss_newton;
  const double mean_diag = std::max(h.diagonal().mean(), 1e-12);
  h.diagonal().array() += options.damping * h.diagonal().array() + 1e-9 * mean_diag;
  const Eigen::LDLT<detail::PoseMatrix> ldlt(h);
  PoseVector step = -ldlt.solve(e.gradient);
  if (!step.allFinite() || step.dot(e.gradient) >= 0.0) {
    // Not a descent direction (degenerate system); fall back to scaled gradient.
    step = -e.gradient / mean_diag;
  }
  return step;
}

}  // namespace

FitResult optimize_pose(const Skeleton& skeleton, const FittingTargets& targets,
                        const TrackerState& state, const Camera& camera,
                        const EnergyWeights& weights, const Pose& init,
                        const DescentOptions& options) {
  weights.validate();
  if (!init.is_finite()) throw Error(ErrorCode::kInvalidInput, "optimize_pose: non-finite init");
  const bool want_gn = options.conditioning == Conditioning::kGaussNewton;

  FitResult result;
  result.pose = init;
  auto current = detail::evaluate_weighted(skeleton, init, targets, state, camera, weights, want_gn);
  result.initial_energy = current.value;

  for (int it = 0; it < options.iterations; ++it) {
    if (!std::isfinite(current.value)) break;
    const PoseVector direction = descent_direction(current, options);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, alpha *= 0.5) {
      Pose trial = result.pose;
      trial.params += alpha * direction;
      auto next = detail::evaluate_weighted(skeleton, trial, targets, state, camera, weights, want_gn);
      if (next.value <= current.value) {
        result.pose = trial;
        current = std::move(next);
        accepted = true;
        break;
      }
    }
    // A rejected iteration leaves everything unchanged, so later ones would be too.
    if (!accepted) break;
    ++result.accepted_steps;
  }
  result.final_energy = current.value;
  return result;
}

FitResult optimize_pose(const Skeleton& skeleton, const Observation& obs, const TrackerState& state,
                        const Camera& camera, const EnergyWeights& weights, const Pose& init,
                        const DescentOptions& options) {
  if (obs.valid_count() == 0) throw Error(ErrorCode::kNoData, "optimize_pose: no valid joints");
  return optimize_pose(skeleton, FittingTargets::from_observation(obs), state, camera, weights,
                       init, options);
}

Pose initial_pose(const Skeleton& skeleton, const Eigen::Vector3d& root_3d) {
  Pose pose;
  const JointPositions rest = forward_kinematics(skeleton, pose);
  pose.translation() = root_3d - rest.col(skeleton.root_joint());
  return pose;
}

TrackResult track_frame(const Skeleton& skeleton, const Observation& obs, const TrackerState& state,
                        const Camera& camera, const EnergyWeights& weights,
                        const DescentOptions& options) {
  TrackResult out;
  out.state = state;
  out.state.frame_index = state.frame_index + 1;

  const bool usable = obs.valid_count() > 0 && obs.root_3d.allFinite();
  if (!usable) {
    out.coasted = true;
    if (state.history == 0) {
      // Nothing to coast on yet; stay uninitialized.
      out.pose = Pose{};
      return out;
    }
    out.pose = state.theta_prev;
  } else {
    const Pose init = state.history == 0 ? initial_pose(skeleton, obs.root_3d) : state.theta_prev;
    const FitResult fit = optimize_pose(skeleton, obs, state, camera, weights, init, options);
    out.pose = fit.pose;
    out.energy = fit.final_energy;
  }
  out.state.theta_prev2 = state.theta_prev;
  out.state.theta_prev = out.pose;
  out.state.history = std::min(state.history + 1, 2);
  return out;
}

}  // namespace handtrack
