#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "irpc/errors.hpp"
#include "irpc/timing.hpp"

namespace irpc {

struct PixelCoord {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
  friend PixelCoord operator+(PixelCoord a, PixelCoord b) { return {a.x + b.x, a.y + b.y}; }
};

// Axis-aligned pixel box [x, x + width) x [y, y + height).
struct Region {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

// Single-channel real-valued raster, row-major, with its acquisition timing.
class Frame {
 public:
  Frame() = default;

  Frame(int width, int height, std::vector<double> data, FrameTiming timing)
      : width_(width), height_(height), data_(std::move(data)), timing_(timing) {
    if (width <= 0 || height <= 0) throw DomainError("frame dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw DomainError("frame data length does not match width*height");
    for (double v : data_)
      if (!std::isfinite(v)) throw DomainError("frame contains a non-finite value");
  }

  Frame(int width, int height, double fill, FrameTiming timing)
      : Frame(width, height,
              std::vector<double>(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill),
              timing) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  const FrameTiming& timing() const { return timing_; }
  void set_timing(const FrameTiming& timing) { timing_ = timing; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool contains(PixelCoord p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }

  double operator()(int x, int y) const { return data_[index(x, y)]; }
  double& operator()(int x, int y) { return data_[index(x, y)]; }
  double at(PixelCoord p) const {
    if (!contains(p))
      throw DomainError("pixel (" + std::to_string(p.x) + "," + std::to_string(p.y) + ") out of bounds");
    return data_[index(p.x, p.y)];
  }

  // Bilinear sample at a real-valued position; coordinates are clamped to the
  // valid pixel-centre range.
  double sample(double x, double y) const {
    x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
    const int x0 = std::min(static_cast<int>(x), width_ - 2 < 0 ? 0 : width_ - 2);
    const int y0 = std::min(static_cast<int>(y), height_ - 2 < 0 ? 0 : height_ - 2);
    const int x1 = std::min(x0 + 1, width_ - 1);
    const int y1 = std::min(y0 + 1, height_ - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = (*this)(x0, y0) * (1.0 - fx) + (*this)(x1, y0) * fx;
    const double bottom = (*this)(x0, y1) * (1.0 - fx) + (*this)(x1, y1) * fx;
    return top * (1.0 - fy) + bottom * fy;
  }

  // Central-difference gradient magnitude, one-sided at the border.
  double gradient_magnitude(PixelCoord p) const {
    const int xl = std::max(p.x - 1, 0), xr = std::min(p.x + 1, width_ - 1);
    const int yu = std::max(p.y - 1, 0), yd = std::min(p.y + 1, height_ - 1);
    const double gx = xr > xl ? ((*this)(xr, p.y) - (*this)(xl, p.y)) / (xr - xl) : 0.0;
    const double gy = yd > yu ? ((*this)(p.x, yd) - (*this)(p.x, yu)) / (yd - yu) : 0.0;
    return std::hypot(gx, gy);
  }

  Frame crop(const Region& r) const {
    if (r.width <= 0 || r.height <= 0 || r.x < 0 || r.y < 0 || r.x + r.width > width_ ||
        r.y + r.height > height_)
      throw DomainError("crop region outside frame");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(r.width) * r.height);
    for (int y = r.y; y < r.y + r.height; ++y)
      for (int x = r.x; x < r.x + r.width; ++x) out.push_back((*this)(x, y));
    return Frame(r.width, r.height, std::move(out), timing_);
  }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
  FrameTiming timing_;
};

// Time-ordered frames of equal size with non-overlapping acquisition windows.
class VideoSequence {
 public:
  VideoSequence() = default;
  explicit VideoSequence(std::vector<Frame> frames) : frames_(std::move(frames)) {
    for (std::size_t i = 1; i < frames_.size(); ++i) check_append(frames_[i - 1], frames_[i], i);
  }

  void push_back(Frame frame) {
    if (!frames_.empty()) check_append(frames_.back(), frame, frames_.size());
    frames_.push_back(std::move(frame));
  }

  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  const Frame& operator[](std::size_t i) const { return frames_[i]; }
  const Frame& at(std::size_t i) const {
    if (i >= frames_.size()) throw DomainError("frame index " + std::to_string(i) + " out of range");
    return frames_[i];
  }
  const std::vector<Frame>& frames() const { return frames_; }
  auto begin() const { return frames_.begin(); }
  auto end() const { return frames_.end(); }

  int width() const { return frames_.empty() ? 0 : frames_.front().width(); }
  int height() const { return frames_.empty() ? 0 : frames_.front().height(); }

 private:
  static void check_append(const Frame& prev, const Frame& next, std::size_t index) {
    if (prev.width() != next.width() || prev.height() != next.height())
      throw DomainError("frame " + std::to_string(index) + " differs in size from its predecessor");
    const FrameTiming& a = prev.timing();
    const FrameTiming& b = next.timing();
    if (!(b.timestamp() > a.timestamp()))
      throw DomainError("frame " + std::to_string(index) + " timestamp is not increasing");
    // Tolerate rounding in timestamps derived from a fixed frame rate.
    const double earliest = (a.timestamp() + a.period()).count();
    if (b.timestamp().count() < earliest - 1e-9 * std::max(1.0, std::abs(earliest)))
      throw DomainError("frame " + std::to_string(index) + " starts before the previous readout ends");
  }

  std::vector<Frame> frames_;
};

}  // namespace irpc
