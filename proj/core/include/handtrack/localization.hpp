#pragma once

#include <vector>

#include <Eigen/Core>

#include "handtrack/camera.hpp"

namespace handtrack {

/// Row-major grid of position likelihoods. Cell (x, y) maps to image pixel
/// (x * scale, y * scale).
struct Heatmap {
  int width = 0;
  int height = 0;
  double scale = 1.0;
  std::vector<float> values;

  static Heatmap zeros(int width, int height, double scale);

  float at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
  float& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }

  friend bool operator==(const Heatmap&, const Heatmap&) = default;
};

struct HeatmapPeak {
  double u = 0.0;  // image px
  double v = 0.0;
  double likelihood = 0.0;
};

// Maximum cell in image coordinates; ties go to the lowest row, then column.
HeatmapPeak heatmap_argmax(const Heatmap& heatmap);

// Argmax followed by a per-axis log-parabola fit through the neighbouring
// cells. Exact for sampled Gaussian blobs; falls back to the cell centre at
// borders or where neighbours are non-positive.
HeatmapPeak refined_peak(const Heatmap& heatmap);

struct LocalizerConfig {
  double delta = 0.98;  // decay factor for extrapolated steps
  double confidence_threshold = 0.1;
  double jump_threshold_px = 30.0;
};

struct LocalizerState {
  LocalizerConfig config;
  bool initialized = false;
  Eigen::Vector2d last_confident = Eigen::Vector2d::Zero();  // phi_{c-1}
  Eigen::Vector2d prior_confident = Eigen::Vector2d::Zero();  // phi_{c-2}
  Eigen::Vector2d previous_maximum = Eigen::Vector2d::Zero();  // phi_{t-1}
  int frames_since_confident = 0;                             // k
};

struct RootUpdate {
  RootLocation root;  // z left at 0; resolve with root_depth_lookup
  LocalizerState state;
  bool confident = true;
};

/// One step of root-maximum post-processing. A maximum is uncertain only when
/// its likelihood is below the threshold and it jumped further than the jump
/// threshold; uncertain frames are extrapolated along the last confident
/// direction with step delta^k.
RootUpdate update_root(const LocalizerState& state, const Heatmap& heatmap);

/// Depth at (u, v); invalid pixels fall back to the median of valid depths in
/// the surrounding 5x5 window.
double root_depth_lookup(const Frame& frame, double u, double v);

}  // namespace handtrack
