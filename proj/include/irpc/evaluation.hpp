#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "irpc/errors.hpp"
#include "irpc/fitting.hpp"
#include "irpc/frame.hpp"
#include "irpc/random.hpp"
#include "irpc/trajectory_metrics.hpp"

namespace irpc {

// Population standard deviation over time of the mean intensity inside
// `region`.
inline double intensity_stability(const VideoSequence& seq, const Region& region) {
  if (region.width <= 0 || region.height <= 0) throw DomainError("empty stability region");
  if (seq.size() < 2) throw DomainError("intensity stability needs at least two frames");
  if (region.x < 0 || region.y < 0 || region.x + region.width > seq.width() ||
      region.y + region.height > seq.height())
    throw DomainError("stability region outside the frame");

  std::vector<double> means;
  means.reserve(seq.size());
  const double area = static_cast<double>(region.width) * region.height;
  for (const Frame& f : seq) {
    double sum = 0.0;
    for (int y = region.y; y < region.y + region.height; ++y)
      for (int x = region.x; x < region.x + region.width; ++x) sum += f(x, y);
    means.push_back(sum / area);
  }
  const double n = static_cast<double>(means.size());
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / n;
  double spread = 0.0;
  for (double m : means) spread += (m - mean) * (m - mean);
  return std::sqrt(spread / n);
}

// Uniform sample of `count` points without replacement (all points when the
// cloud is smaller). Deterministic in `rng`.
inline std::vector<Point3> sample_points(std::span<const Point3> cloud, std::size_t count, Rng& rng) {
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(count, cloud.size());
  for (std::size_t k = 0; k < take; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.index(order.size() - k));
    std::swap(order[k], order[pick]);
  }
  std::vector<Point3> out;
  out.reserve(take);
  for (std::size_t k = 0; k < take; ++k) out.push_back(cloud[order[k]]);
  return out;
}

// Points within half of `thickness` of the plane.
inline std::vector<Point3> slab_points(std::span<const Point3> cloud, const PlaneModel& plane, double thickness) {
  if (!(thickness > 0.0)) throw DomainError("slab thickness must be positive");
  std::vector<Point3> out;
  for (const auto& p : cloud)
    if (std::abs(plane.signed_distance(p)) <= 0.5 * thickness) out.push_back(p);
  return out;
}

// Reference plane from several reconstructions when no ground truth exists:
// draw the same number of points from each cloud (the size of the smallest
// one, or `per_cloud` if smaller), fit a plane to the merged set, keep the
// slab around it and refit.
inline PlaneModel merged_reference_plane(std::span<const std::vector<Point3>> clouds, std::size_t per_cloud,
                                         double slab_thickness, std::uint64_t seed) {
  if (clouds.empty()) throw DomainError("no point clouds to merge");
  std::size_t smallest = per_cloud;
  for (const auto& c : clouds) smallest = std::min(smallest, c.size());
  Rng rng(seed);
  std::vector<Point3> merged;
  for (const auto& c : clouds) {
    auto picked = sample_points(c, smallest, rng);
    merged.insert(merged.end(), picked.begin(), picked.end());
  }
  const PlaneModel coarse = fit_plane(merged);
  return fit_plane(slab_points(merged, coarse, slab_thickness));
}

}  // namespace irpc
