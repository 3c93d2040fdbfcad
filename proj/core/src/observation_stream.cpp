#include <string>

#include "binary_io.hpp"
#include "handtrack/synth.hpp"

namespace handtrack {

namespace {

constexpr char kMagic[8] = {'H', 'T', 'O', 'B', 'S', '\0', '\0', '\0'};
constexpr std::uint32_t kHasGroundTruth = 1u;

void write_heatmap(detail::LeWriter& w, const Heatmap& h) {
  for (float v : h.values) w.f32(v);
}

Heatmap read_heatmap(detail::LeReader& r, int width, int height, double scale) {
  Heatmap h = Heatmap::zeros(width, height, scale);
  for (auto& v : h.values) v = r.f32();
  return h;
}

void check_heatmap(const Heatmap& h, const Heatmap& reference) {
  if (h.width != reference.width || h.height != reference.height || h.scale != reference.scale ||
      h.values.size() != static_cast<size_t>(h.width) * h.height) {
    throw Error(ErrorCode::kInvalidInput,
                "write_observation_stream: heatmaps must share one grid size and scale");
  }
}

}  // namespace

bool ObservationStream::has_ground_truth() const {
  if (ground_truth.empty()) return false;
  for (const auto& g : ground_truth) {
    if (!g) return false;
  }
  return true;
}

void write_observation_stream(const std::filesystem::path& path,
                              std::span<const Observation> observations,
                              std::span<const GroundTruth> ground_truth, const Camera& camera) {
  camera.validate();
  if (!ground_truth.empty() && ground_truth.size() != observations.size()) {
    throw Error(ErrorCode::kInvalidInput,
                "write_observation_stream: ground truth count differs from observation count");
  }
  Heatmap grid = Heatmap::zeros(0, 0, 1.0);
  if (!observations.empty()) grid = observations.front().root_heatmap;
  for (const auto& obs : observations) {
    if (obs.joint_heatmaps.size() != static_cast<size_t>(kNumJoints)) {
      throw Error(ErrorCode::kInvalidInput, "write_observation_stream: expected 21 joint heatmaps");
    }
    check_heatmap(obs.root_heatmap, grid);
    for (const auto& h : obs.joint_heatmaps) check_heatmap(h, grid);
  }

  detail::LeWriter w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kObservationStreamVersion);
  detail::write_camera(w, camera);
  w.u32(kNumJoints);
  w.u32(static_cast<std::uint32_t>(grid.width));
  w.u32(static_cast<std::uint32_t>(grid.height));
  w.f64(grid.scale);
  w.u32(static_cast<std::uint32_t>(observations.size()));

  for (size_t i = 0; i < observations.size(); ++i) {
    const Observation& obs = observations[i];
    const bool gt = !ground_truth.empty();
    w.u32(gt ? kHasGroundTruth : 0u);
    w.f32(static_cast<float>(obs.root.u));
    w.f32(static_cast<float>(obs.root.v));
    w.f32(static_cast<float>(obs.root.z));
    w.f32(static_cast<float>(obs.root.confidence));
    for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(obs.root_3d[c]));
    for (bool b : obs.valid) w.u8(b ? 1 : 0);
    for (int j = 0; j < kNumJoints; ++j)
      for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(obs.local_positions(c, j)));
    write_heatmap(w, obs.root_heatmap);
    for (const auto& h : obs.joint_heatmaps) write_heatmap(w, h);
    if (gt) {
      const GroundTruth& g = ground_truth[i];
      for (int d = 0; d < kNumDofs; ++d) w.f32(static_cast<float>(g.pose.params[d]));
      for (int j = 0; j < kNumJoints; ++j)
        for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(g.positions(c, j)));
    }
  }
  w.close();
}

ObservationStream read_observation_stream(const std::filesystem::path& path,
                                          const Camera* expected_camera) {
  detail::LeReader r(path);
  const std::string where = "'" + path.string() + "'";
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::string(magic, 8) != std::string(kMagic, 8)) {
    throw Error(ErrorCode::kFormat, where + " is not an observation stream");
  }
  if (const auto v = r.u32(); v != kObservationStreamVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                where + " has observation stream version " + std::to_string(v) + ", expected " +
                    std::to_string(kObservationStreamVersion));
  }
  ObservationStream s;
  s.camera = detail::read_camera(r);
  try {
    s.camera.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, where + ": " + e.what());
  }
  if (expected_camera && !(*expected_camera == s.camera)) {
    throw Error(ErrorCode::kFormat, where + ": header camera does not match the configured camera");
  }
  if (const auto j = r.u32(); j != static_cast<std::uint32_t>(kNumJoints)) {
    throw Error(ErrorCode::kFormat, where + ": joint count " + std::to_string(j) + " is not 21");
  }
  s.heatmap_width = static_cast<int>(r.u32());
  s.heatmap_height = static_cast<int>(r.u32());
  s.heatmap_scale = r.f64();
  const auto count = r.u32();
  if (count > 0 && (s.heatmap_width <= 0 || s.heatmap_height <= 0 || !(s.heatmap_scale > 0.0))) {
    throw Error(ErrorCode::kFormat, where + ": invalid heatmap grid in header");
  }

  for (std::uint32_t i = 0; i < count; ++i) {
    Observation obs;
    const auto flags = r.u32();
    if (flags & ~kHasGroundTruth) throw Error(ErrorCode::kFormat, where + ": unknown frame flags");
    obs.root.u = r.f32();
    obs.root.v = r.f32();
    obs.root.z = r.f32();
    obs.root.confidence = r.f32();
    for (int c = 0; c < 3; ++c) obs.root_3d[c] = r.f32();
    for (auto& b : obs.valid) {
      const auto byte = r.u8();
      if (byte > 1) throw Error(ErrorCode::kFormat, where + ": bad validity flag");
      b = byte == 1;
    }
    for (int j = 0; j < kNumJoints; ++j)
      for (int c = 0; c < 3; ++c) obs.local_positions(c, j) = r.f32();
    obs.root_heatmap = read_heatmap(r, s.heatmap_width, s.heatmap_height, s.heatmap_scale);
    obs.joint_heatmaps.reserve(kNumJoints);
    for (int j = 0; j < kNumJoints; ++j) {
      obs.joint_heatmaps.push_back(read_heatmap(r, s.heatmap_width, s.heatmap_height, s.heatmap_scale));
    }
    std::optional<GroundTruth> gt;
    if (flags & kHasGroundTruth) {
      GroundTruth g;
      for (int d = 0; d < kNumDofs; ++d) g.pose.params[d] = r.f32();
      for (int j = 0; j < kNumJoints; ++j)
        for (int c = 0; c < 3; ++c) g.positions(c, j) = r.f32();
      gt = g;
    }
    s.observations.push_back(std::move(obs));
    s.ground_truth.push_back(std::move(gt));
  }
  if (!r.at_eof()) throw Error(ErrorCode::kFormat, where + " has trailing bytes");
  return s;
}

}  // namespace handtrack
