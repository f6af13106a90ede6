#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "irpc/errors.hpp"
#include "irpc/fitting.hpp"

namespace irpc {

struct TrajectorySample {
  double timestamp = 0.0;
  Point3 position = Point3::Zero();  // 2D tracks use z = 0
};

class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TrajectorySample> samples) : samples_(std::move(samples)) {
    for (std::size_t k = 1; k < samples_.size(); ++k)
      if (!(samples_[k].timestamp > samples_[k - 1].timestamp))
        throw DomainError("trajectory timestamps must be strictly increasing (sample " + std::to_string(k) + ")");
  }

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const TrajectorySample& operator[](std::size_t k) const { return samples_[k]; }
  const std::vector<TrajectorySample>& samples() const { return samples_; }

  std::vector<Point3> positions() const {
    std::vector<Point3> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.position);
    return out;
  }

 private:
  std::vector<TrajectorySample> samples_;
};

// Discrete Frechet distance: the smallest achievable maximum leash length
// over monotone couplings, by dynamic programming over the coupling lattice.
inline double discrete_frechet(const Trajectory& a, const Trajectory& b) {
  if (a.empty() || b.empty()) throw DomainError("discrete Frechet distance of an empty trajectory");
  const std::size_t n = a.size(), m = b.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = (a[i].position - b[j].position).norm();
      double reach;
      if (i == 0 && j == 0) reach = d;
      else if (i == 0) reach = std::max(cur[j - 1], d);
      else if (j == 0) reach = std::max(prev[0], d);
      else reach = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
      cur[j] = reach;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

// Classic dynamic time warping: minimum summed Euclidean cost over monotone
// alignments, no warping window.
inline double dtw(const Trajectory& a, const Trajectory& b) {
  if (a.empty() || b.empty()) throw DomainError("DTW of an empty trajectory");
  const std::size_t n = a.size(), m = b.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = (a[i].position - b[j].position).norm();
      if (i == 0 && j == 0) cur[j] = d;
      else if (i == 0) cur[j] = cur[j - 1] + d;
      else if (j == 0) cur[j] = prev[0] + d;
      else cur[j] = std::min({prev[j], prev[j - 1], cur[j - 1]}) + d;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

struct MeanDistance {
  double mean = 0.0;
  std::size_t matched = 0;
  std::size_t unmatched_a = 0;
  std::size_t unmatched_b = 0;
};

// Mean Euclidean distance over samples with identical timestamps in both
// trajectories; samples without a partner are counted but ignored.
inline MeanDistance mean_distance(const Trajectory& a, const Trajectory& b) {
  MeanDistance out;
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].timestamp < b[j].timestamp) {
      ++out.unmatched_a;
      ++i;
    } else if (b[j].timestamp < a[i].timestamp) {
      ++out.unmatched_b;
      ++j;
    } else {
      sum += (a[i].position - b[j].position).norm();
      ++out.matched;
      ++i;
      ++j;
    }
  }
  out.unmatched_a += a.size() - i;
  out.unmatched_b += b.size() - j;
  if (out.matched == 0) throw NoOverlapError("trajectories share no timestamp");
  out.mean = sum / static_cast<double>(out.matched);
  return out;
}

}  // namespace irpc
