#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace handtrack {

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();  // mm

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;

  friend bool operator==(const RigidTransform& a, const RigidTransform& b) {
    return a.rotation == b.rotation && a.translation == b.translation;
  }
};

/// Pinhole camera. Color and depth sensors share intrinsics; color_to_depth
/// maps points from the color sensor frame into the depth sensor frame.
struct Camera {
  double fx = 475.0;
  double fy = 475.0;
  double cx = 160.0;
  double cy = 120.0;
  int width = 320;
  int height = 240;
  RigidTransform color_to_depth;

  void validate() const;
  // Same field of view at another resolution.
  Camera scaled_to(int new_width, int new_height) const;

  friend bool operator==(const Camera&, const Camera&) = default;
};

struct RootLocation {
  double u = 0.0;  // px
  double v = 0.0;
  double z = 0.0;  // mm, 0 when depth has not been resolved
  double confidence = 0.0;
};

/// Registered RGB-D frame in the depth image plane. Depth 0 marks invalid pixels.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> color;  // width * height * 3, row-major RGB
  std::vector<float> depth;         // width * height, mm

  static Frame blank(int width, int height);
  void validate() const;

  float depth_at(int x, int y) const { return depth[static_cast<size_t>(y) * width + x]; }
  std::uint8_t color_at(int x, int y, int c) const {
    return color[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
};

inline constexpr int kCropSize = 128;
inline constexpr float kInvalidDepthSentinel = 10000.0f;

struct CroppedFrame {
  std::vector<float> data;  // kCropSize^2 * 4: R, G, B, normalized depth
  int origin_u = 0;
  int origin_v = 0;
  int side = 0;             // source window side, px
  double root_depth = 0.0;  // mm

  float channel(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * kCropSize + x) * 4 + c];
  }
};

struct CropOptions {
  // Numerator of side = k / z. Defaults to fx * hand_span_mm.
  std::optional<double> k_crop;
  double hand_span_mm = 300.0;
};

struct RegistrationOptions {
  int output_width = 320;
  int output_height = 240;
  // A depth pixel loses its color when another one is nearer by more than this
  // along the same color ray.
  double occlusion_tolerance_mm = 5.0;
};

Eigen::Vector2d project(const Camera& camera, const Eigen::Vector3d& point);
Eigen::Vector3d backproject(const Camera& camera, const RootLocation& root);
Eigen::Vector3d backproject(const Camera& camera, double u, double v, double z);

Frame register_colored_depth(const Camera& camera, const std::vector<std::uint8_t>& color,
                             const std::vector<float>& depth,
                             const RegistrationOptions& options = {});

int crop_side(const Camera& camera, double z, const CropOptions& options = {});
CroppedFrame crop(const Frame& frame, const RootLocation& root, const Camera& camera,
                  const CropOptions& options = {});

// Frame stream files: versioned header with the camera, then raw frames.
void write_frame_stream(const std::filesystem::path& path, const Camera& camera,
                        const std::vector<Frame>& frames);
struct FrameStream {
  Camera camera;
  std::vector<Frame> frames;
};
FrameStream read_frame_stream(const std::filesystem::path& path);

}  // namespace handtrack
