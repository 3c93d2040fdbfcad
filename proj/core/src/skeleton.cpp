#include "handtrack/skeleton.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "handtrack/error.hpp"

namespace handtrack {

namespace {

bool is_angular(DofKind kind) { return kind == DofKind::kFlexion || kind == DofKind::kAbduction; }

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidInput, "skeleton: " + what);
}

Eigen::Matrix3d rot_x(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).matrix(); }
Eigen::Matrix3d rot_z(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).matrix(); }

void require_finite(const Pose& pose) {
  if (!pose.is_finite()) {
    throw Error(ErrorCode::kInvalidInput, "forward_kinematics: non-finite pose entry");
  }
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kCalibrationFailure: return "calibration-failure";
    case ErrorCode::kBehindCamera: return "behind-camera";
    case ErrorCode::kInvalidDepth: return "invalid-depth";
    case ErrorCode::kDepthHole: return "depth-hole";
    case ErrorCode::kNoData: return "no-data";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kMissingGroundTruth: return "missing-ground-truth";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kGenerationFailure: return "generation-failure";
  }
  return "unknown";
}

Skeleton::Skeleton(std::vector<JointDesc> joints, std::vector<DofDesc> dofs, int root_joint)
    : joints_(std::move(joints)), dofs_(std::move(dofs)), root_joint_(root_joint) {
  if (joints_.size() != static_cast<size_t>(kNumJoints)) {
    invalid("expected 21 joints, got " + std::to_string(joints_.size()));
  }
  if (dofs_.size() != static_cast<size_t>(kNumDofs)) {
    invalid("expected 26 DOFs, got " + std::to_string(dofs_.size()));
  }
  if (root_joint_ < 0 || root_joint_ >= kNumJoints) invalid("root joint out of range");
  if (joints_[0].parent != -1) invalid("joint 0 must be the tree root (parent -1)");

  std::array<int, kNumJoints> child_count{};
  directions_.assign(kNumJoints, Eigen::Vector3d::Zero());
  for (int j = 1; j < kNumJoints; ++j) {
    const auto& jd = joints_[j];
    if (jd.parent < 0 || jd.parent >= j) {
      invalid("joint '" + jd.name + "' must have a parent listed before it");
    }
    if (!(std::isfinite(jd.bone_length) && jd.bone_length > 0.0)) {
      invalid("joint '" + jd.name + "' has a non-positive bone length");
    }
    const double n = jd.offset.norm();
    if (!(std::isfinite(n) && n > 0.0)) invalid("joint '" + jd.name + "' has a zero offset");
    directions_[j] = jd.offset / n;
    ++child_count[jd.parent];
  }

  static constexpr DofKind kGlobal[kNumGlobalDofs] = {
      DofKind::kTranslationX, DofKind::kTranslationY, DofKind::kTranslationZ,
      DofKind::kRotationX,    DofKind::kRotationY,    DofKind::kRotationZ};
  for (int d = 0; d < kNumGlobalDofs; ++d) {
    if (dofs_[d].kind != kGlobal[d] || dofs_[d].joint != 0) {
      invalid("DOFs 0-5 must be the wrist translation x,y,z then rotation x,y,z");
    }
  }

  flexion_dof_.fill(-1);
  abduction_dof_.fill(-1);
  for (int d = kNumGlobalDofs; d < kNumDofs; ++d) {
    const auto& dd = dofs_[d];
    if (!is_angular(dd.kind)) invalid("DOF '" + dd.name + "' must be flexion or abduction");
    if (dd.joint <= 0 || dd.joint >= kNumJoints) invalid("DOF '" + dd.name + "' joint out of range");
    if (child_count[dd.joint] == 0) invalid("DOF '" + dd.name + "' is attached to a leaf joint");
    auto& slot = dd.kind == DofKind::kFlexion ? flexion_dof_[dd.joint] : abduction_dof_[dd.joint];
    if (slot != -1) invalid("joint '" + joints_[dd.joint].name + "' has a duplicate DOF kind");
    slot = d;
    if (!(std::isfinite(dd.lower) && std::isfinite(dd.upper) && dd.lower < dd.upper)) {
      invalid("DOF '" + dd.name + "' needs finite limits with lower < upper");
    }
    lower_[d - kNumGlobalDofs] = dd.lower;
    upper_[d - kNumGlobalDofs] = dd.upper;
  }

  for (auto& row : descendant_) row.fill(false);
  for (int j = 1; j < kNumJoints; ++j) {
    for (int a = joints_[j].parent; a != -1; a = joints_[a].parent) descendant_[a][j] = true;
  }
}

bool Skeleton::is_descendant(int joint, int ancestor) const { return descendant_[ancestor][joint]; }

JointPositions Skeleton::rest_positions() const {
  JointPositions out;
  out.col(0).setZero();
  for (int j = 1; j < kNumJoints; ++j) {
    out.col(j) = out.col(joints_[j].parent) + joints_[j].bone_length * directions_[j];
  }
  return out;
}

Skeleton Skeleton::with_bone_lengths(std::span<const double> lengths) const {
  if (lengths.size() != static_cast<size_t>(kNumJoints)) invalid("bone length table must have 21 entries");
  auto joints = joints_;
  for (int j = 1; j < kNumJoints; ++j) joints[j].bone_length = lengths[j];
  return Skeleton(std::move(joints), dofs_, root_joint_);
}

Skeleton default_skeleton() {
  // Flat open hand: fingers along +Y, palm normal +Z, wrist at the origin.
  struct Row {
    const char* name;
    int parent;
    double x, y, z;
  };
  static constexpr Row kRows[kNumJoints] = {
      {"wrist", -1, 0, 0, 0},
      {"thumb_cmc", 0, -25, 20, 0},   {"thumb_mcp", 1, -15, 30, 0},
      {"thumb_ip", 2, -8, 28, 0},     {"thumb_tip", 3, -5, 24, 0},
      {"index_mcp", 0, -22, 85, 0},   {"index_pip", 5, 0, 40, 0},
      {"index_dip", 6, 0, 24, 0},     {"index_tip", 7, 0, 20, 0},
      {"middle_mcp", 0, 0, 90, 0},    {"middle_pip", 9, 0, 45, 0},
      {"middle_dip", 10, 0, 28, 0},   {"middle_tip", 11, 0, 22, 0},
      {"ring_mcp", 0, 20, 85, 0},     {"ring_pip", 13, 0, 42, 0},
      {"ring_dip", 14, 0, 26, 0},     {"ring_tip", 15, 0, 21, 0},
      {"pinky_mcp", 0, 38, 76, 0},    {"pinky_pip", 17, 0, 33, 0},
      {"pinky_dip", 18, 0, 20, 0},    {"pinky_tip", 19, 0, 18, 0},
  };
  std::vector<JointDesc> joints;
  for (const auto& r : kRows) {
    JointDesc jd{r.name, r.parent, Eigen::Vector3d(r.x, r.y, r.z), 0.0};
    jd.bone_length = jd.offset.norm();
    joints.push_back(jd);
  }

  std::vector<DofDesc> dofs = {
      {"translation_x", 0, DofKind::kTranslationX, 0, 0},
      {"translation_y", 0, DofKind::kTranslationY, 0, 0},
      {"translation_z", 0, DofKind::kTranslationZ, 0, 0},
      {"rotation_x", 0, DofKind::kRotationX, 0, 0},
      {"rotation_y", 0, DofKind::kRotationY, 0, 0},
      {"rotation_z", 0, DofKind::kRotationZ, 0, 0},
  };
  const char* fingers[5] = {"thumb", "index", "middle", "ring", "pinky"};
  for (int f = 0; f < 5; ++f) {
    const int base = 1 + 4 * f;  // first articulated joint of the finger
    const std::string name = fingers[f];
    const bool thumb = f == 0;
    const std::string j0 = thumb ? "cmc" : "mcp";
    const std::string j1 = thumb ? "mcp" : "pip";
    const std::string j2 = thumb ? "ip" : "dip";
    const double abd = thumb ? 0.8 : 0.35;
    dofs.push_back({name + "_" + j0 + "_flexion", base, DofKind::kFlexion, -0.5, 1.6});
    dofs.push_back({name + "_" + j0 + "_abduction", base, DofKind::kAbduction, -abd, abd});
    dofs.push_back({name + "_" + j1 + "_flexion", base + 1, DofKind::kFlexion, 0.0, 1.9});
    dofs.push_back({name + "_" + j2 + "_flexion", base + 2, DofKind::kFlexion, 0.0, 1.6});
  }
  return Skeleton(std::move(joints), std::move(dofs), joint::kMiddleMcp);
}

Eigen::Matrix3d rotation_from_xyz(const Eigen::Vector3d& a) {
  // Fixed axes: rotate about X, then Y, then Z.
  return (Eigen::AngleAxisd(a.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(a.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(a.x(), Eigen::Vector3d::UnitX()))
      .matrix();
}

namespace {

struct ChainState {
  JointPositions positions;
  std::array<Eigen::Matrix3d, kNumJoints> frames;
};

ChainState evaluate_chain(const Skeleton& sk, const Pose& pose) {
  ChainState s;
  s.positions.col(0) = pose.translation();
  s.frames[0] = rotation_from_xyz(pose.rotation());
  for (int j = 1; j < kNumJoints; ++j) {
    const int p = sk.parent(j);
    s.positions.col(j) = s.positions.col(p) + s.frames[p] * (sk.bone_length(j) * sk.rest_direction(j));
    Eigen::Matrix3d local = Eigen::Matrix3d::Identity();
    if (const int d = sk.abduction_dof(j); d >= 0) local = rot_z(pose.params[d]);
    if (const int d = sk.flexion_dof(j); d >= 0) local = local * rot_x(pose.params[d]);
    s.frames[j] = s.frames[p] * local;
  }
  return s;
}

}  // namespace

JointPositions forward_kinematics(const Skeleton& skeleton, const Pose& pose) {
  require_finite(pose);
  return evaluate_chain(skeleton, pose).positions;
}

KinematicsResult forward_kinematics_with_jacobian(const Skeleton& sk, const Pose& pose) {
  require_finite(pose);
  const ChainState s = evaluate_chain(sk, pose);
  KinematicsResult out;
  out.positions = s.positions;
  out.jacobian.setZero();

  for (int j = 0; j < kNumJoints; ++j) out.jacobian.block<3, 3>(3 * j, 0).setIdentity();

  // Derivative of a point rotating about a world axis through a pivot: axis x (p - pivot).
  auto add_rotation_column = [&](int dof, const Eigen::Vector3d& axis, int pivot_joint,
                                 bool include_all) {
    const Eigen::Vector3d pivot = s.positions.col(pivot_joint);
    for (int k = 0; k < kNumJoints; ++k) {
      if (!include_all && !sk.is_descendant(k, pivot_joint)) continue;
      out.jacobian.block<3, 1>(3 * k, dof) = axis.cross(s.positions.col(k) - pivot);
    }
  };

  // R = Rz * Ry * Rx, so dR/drx = [Rz Ry ex]x R, dR/dry = [Rz ey]x R, dR/drz = [ez]x R.
  const Eigen::Vector3d rot = pose.rotation();
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(rot.z(), Eigen::Vector3d::UnitZ()).matrix();
  const Eigen::Matrix3d ry = Eigen::AngleAxisd(rot.y(), Eigen::Vector3d::UnitY()).matrix();
  add_rotation_column(3, rz * ry * Eigen::Vector3d::UnitX(), 0, true);
  add_rotation_column(4, rz * Eigen::Vector3d::UnitY(), 0, true);
  add_rotation_column(5, Eigen::Vector3d::UnitZ(), 0, true);

  for (int j = 1; j < kNumJoints; ++j) {
    const Eigen::Matrix3d& parent_frame = s.frames[sk.parent(j)];
    Eigen::Matrix3d pre_flexion = parent_frame;
    if (const int d = sk.abduction_dof(j); d >= 0) {
      add_rotation_column(d, parent_frame * Eigen::Vector3d::UnitZ(), j, false);
      pre_flexion = parent_frame * rot_z(pose.params[d]);
    }
    if (const int d = sk.flexion_dof(j); d >= 0) {
      add_rotation_column(d, pre_flexion * Eigen::Vector3d::UnitX(), j, false);
    }
  }
  return out;
}

FkJacobian fk_jacobian(const Skeleton& skeleton, const Pose& pose) {
  return forward_kinematics_with_jacobian(skeleton, pose).jacobian;
}

Skeleton calibrate_bone_lengths(const Skeleton& skeleton, std::span<const JointPositions> frames) {
  if (frames.empty()) {
    throw Error(ErrorCode::kInvalidInput, "calibrate_bone_lengths: no frames supplied");
  }
  std::array<double, kNumJoints> lengths{};
  for (const auto& f : frames) {
    for (int j = 1; j < kNumJoints; ++j) {
      lengths[j] += (f.col(j) - f.col(skeleton.parent(j))).norm();
    }
  }
  for (int j = 1; j < kNumJoints; ++j) {
    lengths[j] /= static_cast<double>(frames.size());
    if (!(std::isfinite(lengths[j]) && lengths[j] > 0.0)) {
      throw Error(ErrorCode::kCalibrationFailure,
                  "calibrate_bone_lengths: bone '" + skeleton.joint(j).name +
                      "' calibrated to a non-positive or non-finite length");
    }
  }
  return skeleton.with_bone_lengths(lengths);
}

}  // namespace handtrack
