#include <random>

#include <gtest/gtest.h>

#include "handtrack/error.hpp"
#include "handtrack/skeleton.hpp"
#include "support.hpp"

namespace handtrack {
namespace {

using testing::chain_oracle;
using testing::random_pose_within_limits;

TEST(Skeleton, DefaultStructure) {
  const Skeleton sk = default_skeleton();
  EXPECT_EQ(sk.joints().size(), 21u);
  EXPECT_EQ(sk.dofs().size(), 26u);
  EXPECT_EQ(sk.root_joint(), joint::kMiddleMcp);
  EXPECT_EQ(sk.parent(0), -1);
  int angular = 0;
  for (const auto& d : sk.dofs()) {
    angular += (d.kind == DofKind::kFlexion || d.kind == DofKind::kAbduction) ? 1 : 0;
  }
  EXPECT_EQ(angular, kNumAngles);
  for (int tip : joint::kFingertips) {
    EXPECT_EQ(sk.flexion_dof(tip), -1);
    EXPECT_EQ(sk.abduction_dof(tip), -1);
    for (int j = 0; j < kNumJoints; ++j) EXPECT_NE(sk.parent(j), tip);
  }
  for (int j = 1; j < kNumJoints; ++j) EXPECT_GT(sk.bone_length(j), 0.0);
  for (int a = 0; a < kNumAngles; ++a) EXPECT_LT(sk.limits_lower()[a], sk.limits_upper()[a]);
}

TEST(Skeleton, DefaultLimits) {
  const Skeleton sk = default_skeleton();
  for (const auto& d : sk.dofs()) {
    if (d.kind == DofKind::kAbduction) {
      const double w = d.joint == 1 ? 0.8 : 0.35;
      EXPECT_DOUBLE_EQ(d.lower, -w) << d.name;
      EXPECT_DOUBLE_EQ(d.upper, w) << d.name;
    }
  }
  // Index finger chain: MCP flexion, PIP, DIP.
  const int mcp = sk.flexion_dof(5) - kNumGlobalDofs;
  const int pip = sk.flexion_dof(6) - kNumGlobalDofs;
  const int dip = sk.flexion_dof(7) - kNumGlobalDofs;
  EXPECT_DOUBLE_EQ(sk.limits_lower()[mcp], -0.5);
  EXPECT_DOUBLE_EQ(sk.limits_upper()[mcp], 1.6);
  EXPECT_DOUBLE_EQ(sk.limits_lower()[pip], 0.0);
  EXPECT_DOUBLE_EQ(sk.limits_upper()[pip], 1.9);
  EXPECT_DOUBLE_EQ(sk.limits_lower()[dip], 0.0);
  EXPECT_DOUBLE_EQ(sk.limits_upper()[dip], 1.6);
}

TEST(Skeleton, RejectsBadStructure) {
  const Skeleton sk = default_skeleton();
  auto joints = sk.joints();
  auto dofs = sk.dofs();

  auto bad_len = joints;
  bad_len[3].bone_length = 0.0;
  EXPECT_THROW(Skeleton(bad_len, dofs, 9), Error);

  auto bad_limits = dofs;
  bad_limits[10].lower = bad_limits[10].upper;
  EXPECT_THROW(Skeleton(joints, bad_limits, 9), Error);

  auto short_dofs = dofs;
  short_dofs.pop_back();
  EXPECT_THROW(Skeleton(joints, short_dofs, 9), Error);

  auto tip_dof = dofs;
  tip_dof[10].joint = joint::kIndexTip;
  EXPECT_THROW(Skeleton(joints, tip_dof, 9), Error);

  auto cycle = joints;
  cycle[2].parent = 3;
  EXPECT_THROW(Skeleton(cycle, dofs, 9), Error);
}

TEST(ForwardKinematics, ZeroPoseIsTranslatedTemplate) {
  const Skeleton sk = default_skeleton();
  Pose p;
  p.translation() << 12.0, -7.0, 480.0;
  const JointPositions fk = forward_kinematics(sk, p);
  const JointPositions rest = sk.rest_positions();
  EXPECT_TRUE(fk.col(0).isApprox(p.translation()));
  for (int j = 0; j < kNumJoints; ++j) {
    EXPECT_NEAR((fk.col(j) - rest.col(j) - p.translation()).norm(), 0.0, 1e-12);
  }
  // Template: flat hand, fingers along +Y, middle MCP at (0, 90, 0).
  EXPECT_NEAR((rest.col(joint::kMiddleMcp) - Eigen::Vector3d(0, 90, 0)).norm(), 0.0, 1e-12);
  for (int j = 0; j < kNumJoints; ++j) EXPECT_DOUBLE_EQ(rest(2, j), 0.0);
}

TEST(ForwardKinematics, TranslationShiftsEveryJoint) {
  const Skeleton sk = default_skeleton();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    Pose p = random_pose_within_limits(sk, rng);
    Pose q = p;
    q.params[0] += 10.0;
    const JointPositions d = forward_kinematics(sk, q) - forward_kinematics(sk, p);
    for (int j = 0; j < kNumJoints; ++j) {
      EXPECT_NEAR(d(0, j), 10.0, 1e-9);
      EXPECT_NEAR(d(1, j), 0.0, 1e-9);
      EXPECT_NEAR(d(2, j), 0.0, 1e-9);
    }
  }
}

TEST(ForwardKinematics, MatchesTransformChainOracle) {
  const Skeleton sk = default_skeleton();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Pose p = random_pose_within_limits(sk, rng);
    const JointPositions diff = forward_kinematics(sk, p) - chain_oracle(sk, p);
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ForwardKinematics, RejectsNonFinitePose) {
  Pose p;
  p.params[12] = std::nan("");
  EXPECT_THROW(forward_kinematics(default_skeleton(), p), Error);
  try {
    fk_jacobian(default_skeleton(), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(ForwardKinematics, BoneLengthsConserved) {
  const Skeleton sk = default_skeleton();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> wild(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    Pose p = random_pose_within_limits(sk, rng);
    if (i % 2) {
      for (int d = 3; d < kNumDofs; ++d) p.params[d] = wild(rng);  // outside limits too
    }
    const JointPositions fk = forward_kinematics(sk, p);
    for (int j = 1; j < kNumJoints; ++j) {
      EXPECT_NEAR((fk.col(j) - fk.col(sk.parent(j))).norm(), sk.bone_length(j), 1e-9);
    }
  }
}

TEST(ForwardKinematics, RigidEquivariance) {
  const Skeleton sk = default_skeleton();
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    Pose p = random_pose_within_limits(sk, rng);
    Pose base = p;
    base.translation().setZero();
    base.rotation().setZero();
    const Eigen::Matrix3d r = rotation_from_xyz(p.rotation());
    const JointPositions expected = (r * forward_kinematics(sk, base)).colwise() + Eigen::Vector3d(p.translation());
    EXPECT_LT((forward_kinematics(sk, p) - expected).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ForwardKinematics, RotationConventionIsFixedAxisXyz) {
  const Eigen::Vector3d a(0.3, -0.2, 0.7);
  const Eigen::Matrix3d expected = Eigen::AngleAxisd(a.z(), Eigen::Vector3d::UnitZ()).matrix() *
                                   Eigen::AngleAxisd(a.y(), Eigen::Vector3d::UnitY()).matrix() *
                                   Eigen::AngleAxisd(a.x(), Eigen::Vector3d::UnitX()).matrix();
  EXPECT_LT((rotation_from_xyz(a) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ForwardKinematics, DofLocality) {
  const Skeleton sk = default_skeleton();
  std::mt19937_64 rng(21);
  const Pose p = random_pose_within_limits(sk, rng);
  const JointPositions base = forward_kinematics(sk, p);
  for (int d = kNumGlobalDofs; d < kNumDofs; ++d) {
    Pose q = p;
    q.params[d] += 0.1;
    const JointPositions moved = forward_kinematics(sk, q);
    const int owner = sk.dofs()[d].joint;
    for (int j = 0; j < kNumJoints; ++j) {
      const double shift = (moved.col(j) - base.col(j)).norm();
      if (sk.is_descendant(j, owner)) {
        EXPECT_GT(shift, 1e-6) << "dof " << d << " joint " << j;
      } else {
        EXPECT_EQ(shift, 0.0) << "dof " << d << " joint " << j;
      }
    }
  }
}

TEST(FkJacobian, TranslationColumnsAreIdentityBlocks) {
  const Skeleton sk = default_skeleton();
  std::mt19937_64 rng(2);
  const FkJacobian jac = fk_jacobian(sk, random_pose_within_limits(sk, rng));
  for (int j = 0; j < kNumJoints; ++j) {
    EXPECT_TRUE((jac.block<3, 3>(3 * j, 0).isIdentity(0.0)));
  }
}

TEST(FkJacobian, PipFlexionAffectsOnlyDistalJoints) {
  const Skeleton sk = default_skeleton();
  const FkJacobian jac = fk_jacobian(sk, Pose{});
  const int pip = 6;  // index PIP
  const int dof = sk.flexion_dof(pip);
  for (int j = 0; j < kNumJoints; ++j) {
    const double n = jac.block<3, 1>(3 * j, dof).norm();
    if (j == 7 || j == 8) {
      EXPECT_GT(n, 0.0);
    } else {
      EXPECT_EQ(n, 0.0) << j;
    }
  }
}

TEST(FkJacobian, MatchesCentralDifferences) {
  const Skeleton sk = default_skeleton();
  std::mt19937_64 rng(17);
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Pose p = random_pose_within_limits(sk, rng);
    const FkJacobian jac = fk_jacobian(sk, p);
    FkJacobian fd;
    for (int d = 0; d < kNumDofs; ++d) {
      Pose a = p, b = p;
      a.params[d] += h;
      b.params[d] -= h;
      const JointPositions diff = (chain_oracle(sk, a) - chain_oracle(sk, b)) / (2.0 * h);
      fd.col(d) = diff.reshaped();
    }
    worst = std::max(worst, (jac - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Calibration, FixedPoint) {
  const Skeleton sk = default_skeleton();
  std::mt19937_64 rng(4);
  std::vector<JointPositions> frames;
  for (int i = 0; i < 10; ++i) frames.push_back(forward_kinematics(sk, random_pose_within_limits(sk, rng)));
  const Skeleton cal = calibrate_bone_lengths(sk, frames);
  for (int j = 1; j < kNumJoints; ++j) EXPECT_NEAR(cal.bone_length(j), sk.bone_length(j), 1e-9);
  EXPECT_EQ(cal.root_joint(), sk.root_joint());
  EXPECT_EQ(cal.limits_lower(), sk.limits_lower());
}

TEST(Calibration, MeanOfMeasuredLengths) {
  const Skeleton sk = default_skeleton();
  JointPositions a = sk.rest_positions(), b = sk.rest_positions();
  // Move the index tip so the DIP-TIP bone measures 40 and 42 mm.
  a.col(8) = a.col(7) + Eigen::Vector3d(0, 40, 0);
  b.col(8) = b.col(7) + Eigen::Vector3d(0, 0, 42);
  const std::vector<JointPositions> frames{a, b};
  EXPECT_NEAR(calibrate_bone_lengths(sk, frames).bone_length(8), 41.0, 1e-12);
}

TEST(Calibration, UniformScale) {
  const Skeleton sk = default_skeleton();
  std::vector<double> scaled(kNumJoints, 0.0);
  for (int j = 1; j < kNumJoints; ++j) scaled[j] = 1.2 * sk.bone_length(j);
  const Skeleton big = sk.with_bone_lengths(scaled);
  std::mt19937_64 rng(9);
  std::vector<JointPositions> frames;
  for (int i = 0; i < 5; ++i) frames.push_back(forward_kinematics(big, random_pose_within_limits(sk, rng)));
  const Skeleton cal = calibrate_bone_lengths(sk, frames);
  for (int j = 1; j < kNumJoints; ++j) EXPECT_NEAR(cal.bone_length(j), 1.2 * sk.bone_length(j), 1e-9);
}

TEST(Calibration, Errors) {
  const Skeleton sk = default_skeleton();
  try {
    calibrate_bone_lengths(sk, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
  JointPositions collapsed = sk.rest_positions();
  collapsed.col(8) = collapsed.col(7);
  const std::vector<JointPositions> frames{collapsed};
  try {
    calibrate_bone_lengths(sk, frames);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCalibrationFailure);
  }
}

}  // namespace
}  // namespace handtrack
