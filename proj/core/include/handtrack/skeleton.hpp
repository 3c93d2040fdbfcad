#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace handtrack {

inline constexpr int kNumJoints = 21;
inline constexpr int kNumDofs = 26;
inline constexpr int kNumGlobalDofs = 6;
inline constexpr int kNumAngles = kNumDofs - kNumGlobalDofs;

// Joint order used everywhere: wrist, then thumb (CMC, MCP, IP, TIP) and the
// four fingers (MCP, PIP, DIP, TIP) from index to pinky.
namespace joint {
inline constexpr int kWrist = 0;
inline constexpr int kThumbTip = 4;
inline constexpr int kIndexTip = 8;
inline constexpr int kMiddleMcp = 9;
inline constexpr int kMiddleTip = 12;
inline constexpr int kRingTip = 16;
inline constexpr int kPinkyTip = 20;
inline constexpr std::array<int, 5> kFingertips = {kThumbTip, kIndexTip, kMiddleTip,
                                                   kRingTip, kPinkyTip};
}  // namespace joint

using PoseVector = Eigen::Matrix<double, kNumDofs, 1>;
using JointPositions = Eigen::Matrix<double, 3, kNumJoints>;
using FkJacobian = Eigen::Matrix<double, 3 * kNumJoints, kNumDofs>;

/// Pose parameter vector: translation (mm), fixed-axis XYZ rotation (rad),
/// then the 20 joint angles (rad) in DOF-table order.
struct Pose {
  PoseVector params = PoseVector::Zero();

  auto translation() { return params.segment<3>(0); }
  auto translation() const { return params.segment<3>(0); }
  auto rotation() { return params.segment<3>(3); }
  auto rotation() const { return params.segment<3>(3); }
  auto angles() { return params.segment<kNumAngles>(kNumGlobalDofs); }
  auto angles() const { return params.segment<kNumAngles>(kNumGlobalDofs); }

  bool is_finite() const { return params.allFinite(); }
};

enum class DofKind {
  kTranslationX,
  kTranslationY,
  kTranslationZ,
  kRotationX,
  kRotationY,
  kRotationZ,
  kFlexion,
  kAbduction,
};

struct JointDesc {
  std::string name;
  int parent = -1;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();  // rest direction from the parent
  double bone_length = 0.0;                          // mm; unused for the wrist
};

struct DofDesc {
  std::string name;
  int joint = 0;
  DofKind kind = DofKind::kFlexion;
  double lower = 0.0;  // rad, angular DOFs only
  double upper = 0.0;
};

/// 21-joint, 26-DOF kinematic hand. Construction validates every structural
/// invariant; instances are immutable afterwards.
class Skeleton {
 public:
  Skeleton(std::vector<JointDesc> joints, std::vector<DofDesc> dofs, int root_joint);

  const std::vector<JointDesc>& joints() const { return joints_; }
  const std::vector<DofDesc>& dofs() const { return dofs_; }
  int root_joint() const { return root_joint_; }

  const JointDesc& joint(int j) const { return joints_[j]; }
  int parent(int j) const { return joints_[j].parent; }
  double bone_length(int j) const { return joints_[j].bone_length; }
  const Eigen::Vector3d& rest_direction(int j) const { return directions_[j]; }

  // Per-angular-DOF limits, indexed 0..19 (i.e. DOF index minus 6).
  const Eigen::Matrix<double, kNumAngles, 1>& limits_lower() const { return lower_; }
  const Eigen::Matrix<double, kNumAngles, 1>& limits_upper() const { return upper_; }

  int flexion_dof(int j) const { return flexion_dof_[j]; }
  int abduction_dof(int j) const { return abduction_dof_[j]; }

  // True when `joint` lies strictly below `ancestor` in the tree.
  bool is_descendant(int joint, int ancestor) const;

  // Zero-pose joint positions with the wrist at the origin.
  JointPositions rest_positions() const;

  Skeleton with_bone_lengths(std::span<const double> lengths) const;

 private:
  std::vector<JointDesc> joints_;
  std::vector<DofDesc> dofs_;
  int root_joint_ = joint::kMiddleMcp;
  std::vector<Eigen::Vector3d> directions_;
  std::array<int, kNumJoints> flexion_dof_{};
  std::array<int, kNumJoints> abduction_dof_{};
  std::array<std::array<bool, kNumJoints>, kNumJoints> descendant_{};
  Eigen::Matrix<double, kNumAngles, 1> lower_;
  Eigen::Matrix<double, kNumAngles, 1> upper_;
};

Skeleton default_skeleton();

Skeleton load_skeleton(const std::filesystem::path& path);
Skeleton skeleton_from_json_text(const std::string& text);
std::string skeleton_to_json_text(const Skeleton& skeleton);

Eigen::Matrix3d rotation_from_xyz(const Eigen::Vector3d& angles);

JointPositions forward_kinematics(const Skeleton& skeleton, const Pose& pose);

struct KinematicsResult {
  JointPositions positions;
  FkJacobian jacobian;  // row 3*j+c is coordinate c of joint j
};

KinematicsResult forward_kinematics_with_jacobian(const Skeleton& skeleton, const Pose& pose);
FkJacobian fk_jacobian(const Skeleton& skeleton, const Pose& pose);

/// Sets each bone to the mean endpoint distance over `frames`.
Skeleton calibrate_bone_lengths(const Skeleton& skeleton,
                                std::span<const JointPositions> frames);

}  // namespace handtrack
