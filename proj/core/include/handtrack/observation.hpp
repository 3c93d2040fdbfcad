#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "handtrack/camera.hpp"
#include "handtrack/localization.hpp"
#include "handtrack/skeleton.hpp"

namespace handtrack {

/// Per-frame regressor output: root-relative joint positions, per-joint 2D
/// heatmaps, the 2.5D root and its backprojection.
struct Observation {
  JointPositions local_positions = JointPositions::Zero();  // p^L, mm
  Heatmap root_heatmap;
  std::vector<Heatmap> joint_heatmaps;  // kNumJoints entries
  RootLocation root;
  Eigen::Vector3d root_3d = Eigen::Vector3d::Zero();  // r, mm
  std::array<bool, kNumJoints> valid{};

  // p^G = p^L + r
  JointPositions global_positions() const { return local_positions.colwise() + root_3d; }
  int valid_count() const;
};

inline int Observation::valid_count() const {
  int n = 0;
  for (bool b : valid) n += b ? 1 : 0;
  return n;
}

}  // namespace handtrack
