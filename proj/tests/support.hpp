#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "handtrack/error.hpp"
#include "handtrack/skeleton.hpp"

namespace handtrack::testing {

inline Pose random_pose_within_limits(const Skeleton& sk, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Pose p;
  p.params[0] = -60.0 + 120.0 * unit(rng);
  p.params[1] = -60.0 + 120.0 * unit(rng);
  p.params[2] = 400.0 + 300.0 * unit(rng);
  for (int i = 3; i < 6; ++i) p.params[i] = -0.8 + 1.6 * unit(rng);
  for (int a = 0; a < kNumAngles; ++a) {
    const double lo = sk.limits_lower()[a], hi = sk.limits_upper()[a];
    p.params[kNumGlobalDofs + a] = lo + (hi - lo) * unit(rng);
  }
  return p;
}

// Independent forward kinematics: walks the path from the wrist to each joint
// multiplying explicit 4x4 homogeneous transforms. DOFs are looked up from the
// raw DOF table, not from the skeleton's cached per-joint indices.
inline JointPositions chain_oracle(const Skeleton& sk, const Pose& pose) {
  using M4 = Eigen::Matrix4d;
  auto rx = [](double t) {
    M4 m = M4::Identity();
    m(1, 1) = std::cos(t), m(1, 2) = -std::sin(t);
    m(2, 1) = std::sin(t), m(2, 2) = std::cos(t);
    return m;
  };
  auto ry = [](double t) {
    M4 m = M4::Identity();
    m(0, 0) = std::cos(t), m(0, 2) = std::sin(t);
    m(2, 0) = -std::sin(t), m(2, 2) = std::cos(t);
    return m;
  };
  auto rz = [](double t) {
    M4 m = M4::Identity();
    m(0, 0) = std::cos(t), m(0, 1) = -std::sin(t);
    m(1, 0) = std::sin(t), m(1, 1) = std::cos(t);
    return m;
  };
  auto translate = [](const Eigen::Vector3d& t) {
    M4 m = M4::Identity();
    m.block<3, 1>(0, 3) = t;
    return m;
  };
  auto local_rotation = [&](int j) {
    double flex = 0.0, abd = 0.0;
    for (size_t d = 0; d < sk.dofs().size(); ++d) {
      if (sk.dofs()[d].joint != j || d < kNumGlobalDofs) continue;
      if (sk.dofs()[d].kind == DofKind::kFlexion) flex = pose.params[static_cast<int>(d)];
      if (sk.dofs()[d].kind == DofKind::kAbduction) abd = pose.params[static_cast<int>(d)];
    }
    return M4(rz(abd) * rx(flex));
  };

  JointPositions out;
  for (int j = 0; j < kNumJoints; ++j) {
    std::vector<int> path;
    for (int k = j; k >= 0; k = sk.parent(k)) path.insert(path.begin(), k);
    M4 t = translate(pose.translation()) * rz(pose.params[5]) * ry(pose.params[4]) *
           rx(pose.params[3]);
    for (size_t i = 1; i < path.size(); ++i) {
      const int k = path[i];
      const Eigen::Vector3d offset = sk.joint(k).offset.normalized() * sk.bone_length(k);
      t = t * local_rotation(path[i - 1]) * translate(offset);
    }
    out.col(j) = t.block<3, 1>(0, 3);
  }
  return out;
}

// Code of the handtrack::Error thrown by `f`; records a failure if none is thrown.
inline ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a handtrack::Error";
  return static_cast<ErrorCode>(-1);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("handtrack_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace handtrack::testing
