#include "handtrack/camera.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "handtrack/error.hpp"

namespace handtrack {

namespace {

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

}  // namespace

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

void Camera::validate() const {
  if (!(fx > 0.0 && fy > 0.0 && std::isfinite(fx) && std::isfinite(fy))) {
    throw Error(ErrorCode::kInvalidInput, "camera: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidInput, "camera: resolution must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw Error(ErrorCode::kInvalidInput, "camera: principal point must be finite");
  }
}

Camera Camera::scaled_to(int new_width, int new_height) const {
  Camera c = *this;
  const double sx = static_cast<double>(new_width) / width;
  const double sy = static_cast<double>(new_height) / height;
  c.fx *= sx;
  c.fy *= sy;
  c.cx *= sx;
  c.cy *= sy;
  c.width = new_width;
  c.height = new_height;
  return c;
}

Frame Frame::blank(int width, int height) {
  Frame f;
  f.width = width;
  f.height = height;
  f.color.assign(static_cast<size_t>(width) * height * 3, 0);
  f.depth.assign(static_cast<size_t>(width) * height, 0.0f);
  return f;
}

void Frame::validate() const {
  const size_t n = static_cast<size_t>(width) * height;
  if (width <= 0 || height <= 0 || color.size() != 3 * n || depth.size() != n) {
    throw Error(ErrorCode::kInvalidInput, "frame: buffer sizes do not match dimensions");
  }
  for (float d : depth) {
    if (!(d >= 0.0f) || !std::isfinite(d)) {
      throw Error(ErrorCode::kInvalidInput, "frame: depth values must be finite and non-negative");
    }
  }
}

Eigen::Vector2d project(const Camera& camera, const Eigen::Vector3d& p) {
  if (!(p.z() > 0.0)) {
    throw Error(ErrorCode::kBehindCamera, "project: point has z <= 0");
  }
  return {camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy};
}

Eigen::Vector3d backproject(const Camera& camera, double u, double v, double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw Error(ErrorCode::kInvalidDepth, "backproject: depth must be positive");
  }
  return {(u - camera.cx) * z / camera.fx, (v - camera.cy) * z / camera.fy, z};
}

Eigen::Vector3d backproject(const Camera& camera, const RootLocation& root) {
  return backproject(camera, root.u, root.v, root.z);
}

Frame register_colored_depth(const Camera& camera, const std::vector<std::uint8_t>& color,
                             const std::vector<float>& depth, const RegistrationOptions& options) {
  camera.validate();
  const int w = camera.width;
  const int h = camera.height;
  const size_t n = static_cast<size_t>(w) * h;
  if (color.size() != 3 * n || depth.size() != n) {
    throw Error(ErrorCode::kInvalidInput,
                "register_colored_depth: image sizes do not match the camera resolution");
  }
  if (options.output_width <= 0 || options.output_height <= 0 ||
      w % options.output_width != 0 || h % options.output_height != 0 ||
      w / options.output_width != h / options.output_height) {
    throw Error(ErrorCode::kInvalidInput,
                "register_colored_depth: input must be an integer multiple of the output size");
  }

  const RigidTransform depth_to_color = camera.color_to_depth.inverse();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> zbuffer(n, kInf);
  std::vector<int> target(n, -1);
  std::vector<double> target_depth(n, 0.0);

  // Pass 1: every valid depth pixel finds its color pixel; keep the nearest hit per color pixel.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      const float z = depth[i];
      if (!(z > 0.0f)) continue;
      const Eigen::Vector3d pc = depth_to_color.apply(backproject(camera, x, y, z));
      if (!(pc.z() > 0.0)) continue;
      const Eigen::Vector2d uv = project(camera, pc);
      const int uc = round_half_up(uv.x());
      const int vc = round_half_up(uv.y());
      if (uc < 0 || vc < 0 || uc >= w || vc >= h) continue;
      const int ci = vc * w + uc;
      target[i] = ci;
      target_depth[i] = pc.z();
      zbuffer[ci] = std::min(zbuffer[ci], pc.z());
    }
  }

  Frame full = Frame::blank(w, h);
  for (size_t i = 0; i < n; ++i) {
    if (!(depth[i] > 0.0f)) continue;
    full.depth[i] = depth[i];
    const int ci = target[i];
    if (ci < 0 || target_depth[i] > zbuffer[ci] + options.occlusion_tolerance_mm) continue;
    for (int c = 0; c < 3; ++c) full.color[3 * i + c] = color[3 * static_cast<size_t>(ci) + c];
  }

  const int factor = w / options.output_width;
  if (factor == 1) return full;

  // Depth: nearest (top-left sample of each block). Color: block mean.
  Frame out = Frame::blank(options.output_width, options.output_height);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const size_t o = static_cast<size_t>(y) * out.width + x;
      out.depth[o] = full.depth_at(x * factor, y * factor);
      for (int c = 0; c < 3; ++c) {
        int sum = 0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx) sum += full.color_at(x * factor + dx, y * factor + dy, c);
        out.color[3 * o + c] = static_cast<std::uint8_t>((sum + factor * factor / 2) / (factor * factor));
      }
    }
  }
  return out;
}

int crop_side(const Camera& camera, double z, const CropOptions& options) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw Error(ErrorCode::kInvalidDepth, "crop: root depth must be positive");
  }
  const double k = options.k_crop.value_or(camera.fx * options.hand_span_mm);
  return std::max(1, round_half_up(k / z));
}

CroppedFrame crop(const Frame& frame, const RootLocation& root, const Camera& camera,
                  const CropOptions& options) {
  const int side = crop_side(camera, root.z, options);
  frame.validate();

  CroppedFrame out;
  out.side = side;
  out.root_depth = root.z;
  out.origin_u = round_half_up(root.u - side / 2.0);
  out.origin_v = round_half_up(root.v - side / 2.0);
  out.data.assign(static_cast<size_t>(kCropSize) * kCropSize * 4, 0.0f);

  const double step = static_cast<double>(side) / kCropSize;
  auto color_or_zero = [&](int x, int y, int c) -> double {
    return frame.contains(x, y) ? frame.color_at(x, y, c) : 0.0;
  };

  for (int oy = 0; oy < kCropSize; ++oy) {
    const double sy = out.origin_v + (oy + 0.5) * step - 0.5;
    for (int ox = 0; ox < kCropSize; ++ox) {
      const double sx = out.origin_u + (ox + 0.5) * step - 0.5;
      float* px = &out.data[(static_cast<size_t>(oy) * kCropSize + ox) * 4];

      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double ax = sx - x0;
      const double ay = sy - y0;
      for (int c = 0; c < 3; ++c) {
        const double top = (1 - ax) * color_or_zero(x0, y0, c) + ax * color_or_zero(x0 + 1, y0, c);
        const double bot = (1 - ax) * color_or_zero(x0, y0 + 1, c) + ax * color_or_zero(x0 + 1, y0 + 1, c);
        px[c] = static_cast<float>((1 - ay) * top + ay * bot);
      }

      const int nx = round_half_up(sx);
      const int ny = round_half_up(sy);
      const float d = frame.contains(nx, ny) ? frame.depth_at(nx, ny) : 0.0f;
      px[3] = d > 0.0f ? static_cast<float>(d - root.z) : kInvalidDepthSentinel;
    }
  }
  return out;
}

}  // namespace handtrack
