#include <string>

#include "binary_io.hpp"
#include "handtrack/camera.hpp"

namespace handtrack {

namespace {
constexpr char kMagic[8] = {'H', 'T', 'F', 'R', 'A', 'M', 'E', '\0'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_frame_stream(const std::filesystem::path& path, const Camera& camera,
                        const std::vector<Frame>& frames) {
  camera.validate();
  detail::LeWriter w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kVersion);
  detail::write_camera(w, camera);
  w.u32(static_cast<std::uint32_t>(frames.size()));
  for (const auto& f : frames) {
    f.validate();
    if (f.width != camera.width || f.height != camera.height) {
      throw Error(ErrorCode::kInvalidInput, "write_frame_stream: frame size differs from camera");
    }
    w.bytes(f.color.data(), f.color.size());
    for (float d : f.depth) w.f32(d);
  }
  w.close();
}

FrameStream read_frame_stream(const std::filesystem::path& path) {
  detail::LeReader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::string(magic, 8) != std::string(kMagic, 8)) {
    throw Error(ErrorCode::kFormat, "'" + path.string() + "' is not a frame stream");
  }
  if (const auto v = r.u32(); v != kVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "'" + path.string() + "' has frame stream version " + std::to_string(v));
  }
  FrameStream s;
  s.camera = detail::read_camera(r);
  s.camera.validate();
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    Frame f = Frame::blank(s.camera.width, s.camera.height);
    r.bytes(f.color.data(), f.color.size());
    for (auto& d : f.depth) d = r.f32();
    s.frames.push_back(std::move(f));
  }
  if (!r.at_eof()) throw Error(ErrorCode::kFormat, "'" + path.string() + "' has trailing bytes");
  return s;
}

}  // namespace handtrack
