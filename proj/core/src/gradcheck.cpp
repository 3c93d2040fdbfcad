#include "handtrack/gradcheck.hpp"

#include <algorithm>
#include <functional>
#include <random>

#include "handtrack/observation.hpp"

namespace handtrack {

double GradCheckReport::worst() const { return std::max({pos3d, pos2d, limits, temporal, total}); }

namespace {

double relative_error(const PoseVector& analytic, const PoseVector& numeric) {
  const double scale = std::max(numeric.cwiseAbs().maxCoeff(), 1e-12);
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

PoseVector central_difference(const std::function<double(const Pose&)>& f, const Pose& at) {
  PoseVector g;
  for (int d = 0; d < kNumDofs; ++d) {
    const double h = d < 3 ? 1e-3 : 1e-6;
    Pose plus = at, minus = at;
    plus.params[d] += h;
    minus.params[d] -= h;
    g[d] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

}  // namespace

GradCheckReport run_gradient_check(const Skeleton& sk, const Camera& camera,
                                   const EnergyWeights& weights, int configurations,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  auto random_pose = [&] {
    Pose p;
    for (int i = 0; i < kNumAngles; ++i) {
      // Slightly beyond the limits now and then so the limit term is exercised.
      const double lo = sk.limits_lower()[i], hi = sk.limits_upper()[i];
      const double margin = 0.15 * (hi - lo);
      p.angles()[i] = uniform(lo - margin, hi + margin);
    }
    for (int k = 0; k < 3; ++k) p.rotation()[k] = uniform(-0.5, 0.5);
    p.translation() = Eigen::Vector3d(uniform(-40, 40), uniform(-120, -60), uniform(450, 650));
    return p;
  };

  GradCheckReport report;
  report.configurations = configurations;
  for (int c = 0; c < configurations; ++c) {
    const Pose pose = random_pose();
    const Pose target_pose = random_pose();
    FittingTargets targets;
    targets.positions = forward_kinematics(sk, target_pose);
    for (int j = 0; j < kNumJoints; ++j) {
      targets.valid[j] = unit(rng) > 0.1;
      targets.maxima.col(j) = project(camera, targets.positions.col(j)) +
                              Eigen::Vector2d(uniform(-5, 5), uniform(-5, 5));
    }
    targets.valid[joint::kMiddleMcp] = true;
    TrackerState state;
    state.history = 2;
    state.theta_prev = random_pose();
    state.theta_prev2 = random_pose();

    const EnergyTerms terms = energy_terms(sk, pose, targets, state, camera);
    auto term_fn = [&](TermValue EnergyTerms::*member) {
      return [&, member](const Pose& p) { return (energy_terms(sk, p, targets, state, camera).*member).value; };
    };
    auto update = [&](double& slot, TermValue EnergyTerms::*member) {
      slot = std::max(slot, relative_error((terms.*member).gradient, central_difference(term_fn(member), pose)));
    };
    update(report.pos3d, &EnergyTerms::pos3d);
    update(report.pos2d, &EnergyTerms::pos2d);
    update(report.limits, &EnergyTerms::limits);
    update(report.temporal, &EnergyTerms::temporal);

    const TermValue total = energy(sk, pose, targets, state, camera, weights);
    const PoseVector fd = central_difference(
        [&](const Pose& p) { return energy(sk, p, targets, state, camera, weights).value; }, pose);
    report.total = std::max(report.total, relative_error(total.gradient, fd));
  }
  return report;
}

}  // namespace handtrack
