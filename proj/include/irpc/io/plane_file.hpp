#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "irpc/errors.hpp"

namespace irpc::io {

// Floating-point raster file:
//   bytes 0-3   magic "IRF4" (binary32 samples) or "IRF8" (binary64 samples)
//   bytes 4-7   width, uint32 little-endian
//   bytes 8-11  height, uint32 little-endian
//   then width*height IEEE-754 samples, little-endian, row-major.
enum class PlanePrecision { Float32, Float64 };

struct FloatPlane {
  int width = 0;
  int height = 0;
  std::vector<double> samples;
};

namespace detail {

template <typename UInt>
void put_le(std::vector<unsigned char>& out, UInt v) {
  for (std::size_t b = 0; b < sizeof(UInt); ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

template <typename UInt>
UInt get_le(const unsigned char* p) {
  UInt v = 0;
  for (std::size_t b = 0; b < sizeof(UInt); ++b) v |= static_cast<UInt>(p[b]) << (8 * b);
  return v;
}

}  // namespace detail

inline void write_plane(const std::filesystem::path& path, const FloatPlane& plane, PlanePrecision precision) {
  if (plane.samples.size() != static_cast<std::size_t>(plane.width) * plane.height)
    throw DomainError("plane sample count does not match its dimensions");
  const bool wide = precision == PlanePrecision::Float64;
  std::vector<unsigned char> bytes;
  bytes.reserve(12 + plane.samples.size() * (wide ? 8 : 4));
  const char* magic = wide ? "IRF8" : "IRF4";
  bytes.insert(bytes.end(), magic, magic + 4);
  detail::put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(plane.width));
  detail::put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(plane.height));
  for (double v : plane.samples) {
    if (wide) detail::put_le(bytes, std::bit_cast<std::uint64_t>(v));
    else detail::put_le(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline FloatPlane read_plane(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < 12) throw FormatError(name + ": truncated plane header");
  bool wide;
  if (std::memcmp(buf.data(), "IRF8", 4) == 0) wide = true;
  else if (std::memcmp(buf.data(), "IRF4", 4) == 0) wide = false;
  else throw FormatError(name + ": bad plane magic");
  FloatPlane plane;
  const auto w = detail::get_le<std::uint32_t>(buf.data() + 4);
  const auto h = detail::get_le<std::uint32_t>(buf.data() + 8);
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20)) throw FormatError(name + ": invalid plane dimensions");
  plane.width = static_cast<int>(w);
  plane.height = static_cast<int>(h);
  const std::size_t count = static_cast<std::size_t>(w) * h;
  const std::size_t size = wide ? 8 : 4;
  if (buf.size() != 12 + count * size) throw FormatError(name + ": plane payload size mismatch");
  plane.samples.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned char* p = buf.data() + 12 + k * size;
    plane.samples[k] = wide ? std::bit_cast<double>(detail::get_le<std::uint64_t>(p))
                            : static_cast<double>(std::bit_cast<float>(detail::get_le<std::uint32_t>(p)));
  }
  return plane;
}

}  // namespace irpc::io
