#include "handtrack/localization.hpp"

#include <algorithm>
#include <cmath>

#include "handtrack/error.hpp"

namespace handtrack {

Heatmap Heatmap::zeros(int width, int height, double scale) {
  Heatmap h;
  h.width = width;
  h.height = height;
  h.scale = scale;
  h.values.assign(static_cast<size_t>(width) * height, 0.0f);
  return h;
}

namespace {

struct Cell {
  int x = -1;
  int y = -1;
  float value = 0.0f;
};

Cell max_cell(const Heatmap& hm) {
  if (hm.width <= 0 || hm.height <= 0 || hm.values.size() != static_cast<size_t>(hm.width) * hm.height) {
    throw Error(ErrorCode::kInvalidInput, "heatmap: empty or inconsistent grid");
  }
  if (!(hm.scale > 0.0)) throw Error(ErrorCode::kInvalidInput, "heatmap: scale must be positive");
  Cell best;
  for (int y = 0; y < hm.height; ++y) {
    for (int x = 0; x < hm.width; ++x) {
      const float v = hm.at(x, y);
      if (std::isnan(v)) continue;
      if (best.x < 0 || v > best.value) best = {x, y, v};
    }
  }
  if (best.x < 0) throw Error(ErrorCode::kInvalidInput, "heatmap: all values are NaN");
  return best;
}

double parabola_offset(double left, double centre, double right) {
  if (!(left > 0.0 && centre > 0.0 && right > 0.0)) return 0.0;
  const double l = std::log(left), c = std::log(centre), r = std::log(right);
  const double curvature = l - 2.0 * c + r;
  if (!(curvature < 0.0)) return 0.0;
  return std::clamp(0.5 * (l - r) / curvature, -0.5, 0.5);
}

}  // namespace

HeatmapPeak heatmap_argmax(const Heatmap& heatmap) {
  const Cell c = max_cell(heatmap);
  return {c.x * heatmap.scale, c.y * heatmap.scale, c.value};
}

HeatmapPeak refined_peak(const Heatmap& hm) {
  const Cell c = max_cell(hm);
  double dx = 0.0, dy = 0.0;
  if (c.x > 0 && c.x + 1 < hm.width) dx = parabola_offset(hm.at(c.x - 1, c.y), c.value, hm.at(c.x + 1, c.y));
  if (c.y > 0 && c.y + 1 < hm.height) dy = parabola_offset(hm.at(c.x, c.y - 1), c.value, hm.at(c.x, c.y + 1));
  return {(c.x + dx) * hm.scale, (c.y + dy) * hm.scale, c.value};
}

RootUpdate update_root(const LocalizerState& state, const Heatmap& heatmap) {
  const HeatmapPeak peak = heatmap_argmax(heatmap);
  const Eigen::Vector2d raw(peak.u, peak.v);
  RootUpdate out;
  out.state = state;
  auto& s = out.state;

  if (!s.initialized) {
    s.initialized = true;
    s.last_confident = s.prior_confident = s.previous_maximum = raw;
    s.frames_since_confident = 0;
    out.root = {raw.x(), raw.y(), 0.0, peak.likelihood};
    return out;
  }

  const bool low_likelihood = peak.likelihood < s.config.confidence_threshold;
  const bool far_jump = (raw - s.previous_maximum).norm() > s.config.jump_threshold_px;
  if (!(low_likelihood && far_jump)) {
    s.prior_confident = s.last_confident;
    s.last_confident = raw;
    s.previous_maximum = raw;
    s.frames_since_confident = 0;
    out.root = {raw.x(), raw.y(), 0.0, peak.likelihood};
    return out;
  }

  out.confident = false;
  s.frames_since_confident += 1;
  const Eigen::Vector2d direction = s.last_confident - s.prior_confident;
  const double norm = direction.norm();
  Eigen::Vector2d next = s.previous_maximum;
  if (norm > 0.0) {
    next += std::pow(s.config.delta, s.frames_since_confident) * (direction / norm);
  }
  s.previous_maximum = next;
  out.root = {next.x(), next.y(), 0.0, peak.likelihood};
  return out;
}

double root_depth_lookup(const Frame& frame, double u, double v) {
  const int x = static_cast<int>(std::floor(u + 0.5));
  const int y = static_cast<int>(std::floor(v + 0.5));
  if (!frame.contains(x, y)) {
    throw Error(ErrorCode::kInvalidInput, "root_depth_lookup: (u, v) outside the frame");
  }
  if (const float d = frame.depth_at(x, y); d > 0.0f) return d;

  std::vector<float> valid;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      if (!frame.contains(x + dx, y + dy)) continue;
      if (const float d = frame.depth_at(x + dx, y + dy); d > 0.0f) valid.push_back(d);
    }
  }
  if (valid.empty()) {
    throw Error(ErrorCode::kDepthHole, "root_depth_lookup: no valid depth near the root");
  }
  std::sort(valid.begin(), valid.end());
  const size_t m = valid.size() / 2;
  if (valid.size() % 2 == 1) return valid[m];
  return 0.5 * (static_cast<double>(valid[m - 1]) + valid[m]);
}

}  // namespace handtrack
