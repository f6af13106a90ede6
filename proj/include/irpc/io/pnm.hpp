#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "irpc/errors.hpp"

namespace irpc::io {

// Single-channel graymap as stored on disk.
struct Graymap {
  int width = 0;
  int height = 0;
  int max_value = 65535;
  std::vector<std::uint16_t> samples;  // row-major
};

inline std::uint16_t quantize16(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 65535.0) return 65535;
  return static_cast<std::uint16_t>(std::lround(v));
}

// Binary "P5" graymap. Samples are one byte when max_value < 256, otherwise
// two bytes, most significant first.
inline void write_pgm(const std::filesystem::path& path, const Graymap& img) {
  if (img.max_value < 1 || img.max_value > 65535) throw DomainError("PGM max value must be in [1, 65535]");
  if (img.samples.size() != static_cast<std::size_t>(img.width) * img.height)
    throw DomainError("PGM sample count does not match its dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << img.width << ' ' << img.height << '\n' << img.max_value << '\n';
  const bool wide = img.max_value > 255;
  std::vector<unsigned char> bytes;
  bytes.reserve(img.samples.size() * (wide ? 2 : 1));
  for (std::uint16_t s : img.samples) {
    if (s > img.max_value) throw DomainError("PGM sample exceeds max value");
    if (wide) bytes.push_back(static_cast<unsigned char>(s >> 8));
    bytes.push_back(static_cast<unsigned char>(s & 0xff));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

namespace detail {

inline int read_header_int(const std::vector<unsigned char>& buf, std::size_t& pos, const std::string& name) {
  for (;;) {
    while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= buf.size() || !std::isdigit(buf[pos])) throw FormatError(name + ": malformed PGM header");
  long value = 0;
  while (pos < buf.size() && std::isdigit(buf[pos])) {
    value = value * 10 + (buf[pos] - '0');
    if (value > 1'000'000'000) throw FormatError(name + ": PGM header value out of range");
    ++pos;
  }
  return static_cast<int>(value);
}

}  // namespace detail

inline Graymap read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5') throw FormatError(name + ": not a binary PGM (P5)");
  std::size_t pos = 2;
  Graymap img;
  img.width = detail::read_header_int(buf, pos, name);
  img.height = detail::read_header_int(buf, pos, name);
  img.max_value = detail::read_header_int(buf, pos, name);
  if (img.width <= 0 || img.height <= 0 || img.max_value <= 0 || img.max_value > 65535)
    throw FormatError(name + ": invalid PGM dimensions or max value");
  if (pos >= buf.size() || !std::isspace(buf[pos])) throw FormatError(name + ": malformed PGM header");
  ++pos;  // single whitespace before the raster
  const bool wide = img.max_value > 255;
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  if (buf.size() - pos < count * (wide ? 2 : 1)) throw FormatError(name + ": truncated PGM raster");
  img.samples.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    img.samples[k] = wide ? static_cast<std::uint16_t>((buf[pos + 2 * k] << 8) | buf[pos + 2 * k + 1])
                          : static_cast<std::uint16_t>(buf[pos + k]);
  }
  return img;
}

}  // namespace irpc::io
