#pragma once

#include <cstdint>

#include "handtrack/camera.hpp"
#include "handtrack/energy.hpp"
#include "handtrack/skeleton.hpp"

namespace handtrack {

struct GradCheckReport {
  int configurations = 0;
  // Max over configurations of ||analytic - fd||_inf / ||fd||_inf per term.
  double pos3d = 0.0;
  double pos2d = 0.0;
  double limits = 0.0;
  double temporal = 0.0;
  double total = 0.0;

  double worst() const;
};

/// Compares analytical energy gradients with central finite differences
/// (1e-3 mm for translation, 1e-6 rad otherwise) over random configurations
/// with angles near their limits, joints in front of the camera and an active
/// temporal term.
GradCheckReport run_gradient_check(const Skeleton& skeleton, const Camera& camera,
                                   const EnergyWeights& weights, int configurations,
                                   std::uint64_t seed);

}  // namespace handtrack
