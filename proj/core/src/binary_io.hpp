#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>

#include "handtrack/camera.hpp"
#include "handtrack/error.hpp"

namespace handtrack::detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename U>
U byteswap_if_big(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (size_t i = 0; i < sizeof(U); ++i) out = (out << 8) | ((v >> (8 * i)) & 0xff);
    return out;
  } else {
    return v;
  }
}

class LeWriter {
 public:
  LeWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  }

  void bytes(const void* data, size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    check();
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    v = byteswap_if_big(v);
    bytes(&v, 4);
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) {
    auto bits = byteswap_if_big(std::bit_cast<std::uint64_t>(v));
    bytes(&bits, 8);
  }
  void close() {
    out_.close();
    if (out_.fail()) throw Error(ErrorCode::kIo, "failed to finish writing '" + path_.string() + "'");
  }

 private:
  void check() {
    if (!out_) throw Error(ErrorCode::kIo, "write failed on '" + path_.string() + "'");
  }
  std::filesystem::path path_;
  std::ofstream out_;
};

class LeReader {
 public:
  LeReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  }

  void bytes(void* data, size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) {
      throw Error(ErrorCode::kFormat, "'" + path_.string() + "' is truncated");
    }
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return byteswap_if_big(v);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() {
    std::uint64_t v;
    bytes(&v, 8);
    return std::bit_cast<double>(byteswap_if_big(v));
  }
  bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

inline void write_camera(LeWriter& w, const Camera& c) {
  w.f64(c.fx);
  w.f64(c.fy);
  w.f64(c.cx);
  w.f64(c.cy);
  w.u32(static_cast<std::uint32_t>(c.width));
  w.u32(static_cast<std::uint32_t>(c.height));
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) w.f64(c.color_to_depth.rotation(r, k));
  for (int k = 0; k < 3; ++k) w.f64(c.color_to_depth.translation(k));
}

inline Camera read_camera(LeReader& r) {
  Camera c;
  c.fx = r.f64();
  c.fy = r.f64();
  c.cx = r.f64();
  c.cy = r.f64();
  c.width = static_cast<int>(r.u32());
  c.height = static_cast<int>(r.u32());
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) c.color_to_depth.rotation(i, k) = r.f64();
  for (int k = 0; k < 3; ++k) c.color_to_depth.translation(k) = r.f64();
  return c;
}

}  // namespace handtrack::detail
