#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "handtrack/camera.hpp"
#include "handtrack/eval.hpp"
#include "handtrack/optimizer.hpp"
#include "handtrack/synth.hpp"
#include "support.hpp"

namespace handtrack {
namespace {

using testing::random_pose_within_limits;

FittingTargets exact_targets(const Skeleton& sk, const Camera& cam, const Pose& pose) {
  FittingTargets t;
  t.positions = forward_kinematics(sk, pose);
  for (int j = 0; j < kNumJoints; ++j) {
    t.maxima.col(j) = project(cam, t.positions.col(j));
    t.valid[j] = true;
  }
  return t;
}

Pose pose_in_front(const Skeleton& sk, std::mt19937_64& rng) {
  Pose p = random_pose_within_limits(sk, rng);
  p.params[2] = 450 + std::fmod(p.params[2], 150.0);
  return p;
}

TEST(OptimizePose, StationaryAtGlobalMinimum) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  std::mt19937_64 rng(1);
  for (auto mode : {Conditioning::kGaussNewton, Conditioning::kFixedScales}) {
    const Pose truth = pose_in_front(sk, rng);
    DescentOptions opts;
    opts.conditioning = mode;
    const FitResult r = optimize_pose(sk, exact_targets(sk, cam, truth), TrackerState{}, cam, EnergyWeights{}, truth, opts);
    EXPECT_LT((r.pose.params - truth.params).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(r.final_energy, 1e-20);
  }
}

TEST(OptimizePose, RecoversPerturbedAngles) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Pose truth = pose_in_front(sk, rng);
    // Keep the truth away from the limits so the data term alone decides.
    for (int a = 0; a < kNumAngles; ++a) {
      const double lo = sk.limits_lower()[a] + 0.06, hi = sk.limits_upper()[a] - 0.06;
      truth.params[kNumGlobalDofs + a] = std::clamp(truth.params[kNumGlobalDofs + a], lo, hi);
    }
    Pose init = truth;
    for (int a = 0; a < kNumAngles; ++a) init.params[kNumGlobalDofs + a] += jitter(rng);
    const FitResult r = optimize_pose(sk, exact_targets(sk, cam, truth), TrackerState{}, cam, EnergyWeights{}, init);
    const double err = joint_error_3d(forward_kinematics(sk, r.pose), forward_kinematics(sk, truth), JointSubset::kAll);
    worst = std::max(worst, err);
  }
  EXPECT_LT(worst, 2.0);
}

TEST(OptimizePose, MaskedFingertipStaysKinematicallyConsistent) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Pose truth = pose_in_front(sk, rng);
    FittingTargets t = exact_targets(sk, cam, truth);
    t.valid[joint::kIndexTip] = false;
    t.positions.col(joint::kIndexTip).setConstant(1e6);  // garbage behind the mask
    Pose init = truth;
    init.angles().array() += 0.03;
    init.angles() = init.angles().cwiseMax(sk.limits_lower()).cwiseMin(sk.limits_upper());
    const FitResult r = optimize_pose(sk, t, TrackerState{}, cam, EnergyWeights{}, init);
    const JointPositions fk = forward_kinematics(sk, r.pose);
    EXPECT_NEAR((fk.col(8) - fk.col(7)).norm(), sk.bone_length(8), 1e-9);
    for (int a = 0; a < kNumAngles; ++a) {
      EXPECT_GE(r.pose.params[kNumGlobalDofs + a], sk.limits_lower()[a] - 1e-9);
      EXPECT_LE(r.pose.params[kNumGlobalDofs + a], sk.limits_upper()[a] + 1e-9);
    }
  }
}

TEST(OptimizePose, MonotoneDescent) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> noise(-25, 25), big(-0.5, 0.5);
  for (int i = 0; i < 60; ++i) {
    FittingTargets t = exact_targets(sk, cam, pose_in_front(sk, rng));
    for (int j = 0; j < kNumJoints; ++j) {
      t.positions.col(j) += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
      t.maxima.col(j) += Eigen::Vector2d(noise(rng), noise(rng));
      t.valid[j] = (rng() % 5) != 0;
    }
    t.valid[0] = true;
    Pose init = pose_in_front(sk, rng);
    for (int d = 3; d < kNumDofs; ++d) init.params[d] += big(rng);
    TrackerState s;
    if (i % 2) {
      s.theta_prev = pose_in_front(sk, rng);
      s.theta_prev2 = pose_in_front(sk, rng);
      s.history = 2;
    }
    DescentOptions opts;
    opts.conditioning = i % 3 == 0 ? Conditioning::kFixedScales : Conditioning::kGaussNewton;
    const FitResult r = optimize_pose(sk, t, s, cam, EnergyWeights{}, init, opts);
    EXPECT_LE(r.final_energy, r.initial_energy);
    EXPECT_LE(r.accepted_steps, opts.iterations);
    EXPECT_DOUBLE_EQ(energy(sk, r.pose, t, s, cam, EnergyWeights{}).value, r.final_energy);
  }
}

TEST(OptimizePose, WarmStartRecoversNoiselessSynthFrames) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  SynthConfig cfg = default_synth_config(sk, 17);
  cfg.sequence_length = 30;
  cfg.position_noise_mm = cfg.root_noise_mm = 0;
  const SynthSequence seq = generate_sequence(sk, cam, cfg);
  // Targets are stored as float32, so the minimizer sits within float rounding
  // of the truth. Fit against exact targets to isolate the optimizer.
  for (int t = 1; t < cfg.sequence_length; ++t) {
    const Pose& truth = seq.ground_truth[t].pose;
    const FitResult r = optimize_pose(sk, exact_targets(sk, cam, truth), TrackerState{}, cam, EnergyWeights{},
                                      seq.ground_truth[t - 1].pose);
    EXPECT_LT((r.pose.params - truth.params).cwiseAbs().maxCoeff(), 1e-6) << t;
  }
}

TEST(OptimizePose, NoDataPropagates) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  FittingTargets t;
  EXPECT_EQ(testing::code_of([&] { optimize_pose(sk, t, TrackerState{}, cam, EnergyWeights{}, initial_pose(sk, {0, 0, 500})); }),
            ErrorCode::kNoData);
}

TEST(InitialPose, AlignsRootJoint) {
  const Skeleton sk = default_skeleton();
  const Eigen::Vector3d r(12, -30, 620);
  const Pose p = initial_pose(sk, r);
  EXPECT_LT((forward_kinematics(sk, p).col(sk.root_joint()) - r).norm(), 1e-12);
  EXPECT_EQ(p.rotation(), Eigen::Vector3d::Zero());
  for (int a = 0; a < kNumAngles; ++a) {
    EXPECT_GE(p.angles()[a], sk.limits_lower()[a]);
    EXPECT_LE(p.angles()[a], sk.limits_upper()[a]);
  }
}

Observation observation_from(const Skeleton& sk, const Camera& cam, const Pose& pose) {
  SynthConfig cfg = default_synth_config(sk, 0);
  cfg.sequence_length = 1;
  cfg.pose_trajectory = {pose};
  cfg.position_noise_mm = cfg.root_noise_mm = 0;
  return generate_sequence(sk, cam, cfg).observations.front();
}

TEST(TrackFrame, ConstantObservationsConverge) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  std::mt19937_64 rng(5);
  const Observation obs = observation_from(sk, cam, pose_in_front(sk, rng));
  TrackerState s;
  Pose prev;
  double last_step = 0.0;
  for (int t = 0; t < 10; ++t) {
    const TrackResult r = track_frame(sk, obs, s, cam, EnergyWeights{});
    if (t > 0) last_step = (r.pose.params - prev.params).norm();
    prev = r.pose;
    s = r.state;
  }
  EXPECT_LT(last_step, 1e-6);
  EXPECT_EQ(s.frame_index, 10);
}

TEST(TrackFrame, FrameZeroIgnoresTemporalTerm) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  std::mt19937_64 rng(6);
  const Observation obs = observation_from(sk, cam, pose_in_front(sk, rng));
  EnergyWeights strong;
  strong.temporal = 1e6;
  const TrackResult a = track_frame(sk, obs, TrackerState{}, cam, strong);
  EnergyWeights none;
  none.temporal = 0;
  const TrackResult b = track_frame(sk, obs, TrackerState{}, cam, none);
  EXPECT_EQ(a.pose.params, b.pose.params);
  const FitResult direct = optimize_pose(sk, obs, TrackerState{}, cam, none, initial_pose(sk, obs.root_3d));
  EXPECT_EQ(a.pose.params, direct.pose.params);
  EXPECT_EQ(a.state.history, 1);
  EXPECT_EQ(a.state.frame_index, 1);
}

TEST(TrackFrame, SmoothnessReducesSecondDifferences) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  std::mt19937_64 rng(7);
  const Pose p1 = pose_in_front(sk, rng);
  Pose p2 = p1;
  p2.params[0] += 40;
  p2.angles().array() += 0.2;
  p2.angles() = p2.angles().cwiseMin(sk.limits_upper());
  const Observation o1 = observation_from(sk, cam, p1), o2 = observation_from(sk, cam, p2);

  auto accel_sum = [&](double wt) {
    EnergyWeights w;
    w.temporal = wt;
    TrackerState s;
    std::vector<PoseVector> poses;
    for (int t = 0; t < 16; ++t) {
      const TrackResult r = track_frame(sk, t < 8 ? o1 : o2, s, cam, w);
      poses.push_back(r.pose.params);
      s = r.state;
    }
    double sum = 0.0;
    for (size_t t = 2; t < poses.size(); ++t) sum += (poses[t] - 2 * poses[t - 1] + poses[t - 2]).squaredNorm();
    return sum;
  };
  EXPECT_LT(accel_sum(1e-3), accel_sum(0.0));
}

TEST(TrackFrame, CoastsWithoutData) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  std::mt19937_64 rng(8);
  const Observation good = observation_from(sk, cam, pose_in_front(sk, rng));
  Observation empty = good;
  empty.valid.fill(false);

  const TrackResult cold = track_frame(sk, empty, TrackerState{}, cam, EnergyWeights{});
  EXPECT_TRUE(cold.coasted);
  EXPECT_EQ(cold.state.frame_index, 1);
  EXPECT_EQ(cold.state.history, 0);

  const TrackResult a = track_frame(sk, good, TrackerState{}, cam, EnergyWeights{});
  const TrackResult b = track_frame(sk, empty, a.state, cam, EnergyWeights{});
  EXPECT_TRUE(b.coasted);
  EXPECT_EQ(b.pose.params, a.pose.params);
  EXPECT_EQ(b.state.frame_index, 2);
}

TEST(TrackFrame, OutputKeepsBoneLengths) {
  const Skeleton sk = default_skeleton();
  const Camera cam;
  SynthConfig cfg = default_synth_config(sk, 9);
  cfg.sequence_length = 40;
  cfg.occlusion_rate = 0.3;
  const SynthSequence seq = generate_sequence(sk, cam, cfg);
  TrackerState s;
  for (const auto& obs : seq.observations) {
    const TrackResult r = track_frame(sk, obs, s, cam, EnergyWeights{});
    s = r.state;
    const JointPositions fk = forward_kinematics(sk, r.pose);
    for (int j = 1; j < kNumJoints; ++j) {
      ASSERT_NEAR((fk.col(j) - fk.col(sk.parent(j))).norm(), sk.bone_length(j), 1e-9);
    }
  }
}

}  // namespace
}  // namespace handtrack
