#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "irpc/errors.hpp"

namespace irpc {

using Point3 = Eigen::Vector3d;

struct PointCloud {
  std::vector<Point3> points;
};

// Points x with normal . x == offset.
struct PlaneModel {
  Point3 normal = Point3::UnitZ();
  double offset = 0.0;

  double signed_distance(const Point3& x) const { return normal.dot(x) - offset; }
};

struct LineModel {
  Point3 anchor = Point3::Zero();
  Point3 direction = Point3::UnitX();

  double distance(const Point3& x) const {
    const Point3 d = x - anchor;
    return (d - direction.dot(d) * direction).norm();
  }
  Point3 at(double s) const { return anchor + s * direction; }
};

struct DeviationStats {
  double rmse = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

namespace detail {

// Flip so that the largest-magnitude component is positive.
inline Point3 canonical_sign(Point3 v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  return v(k) < 0.0 ? Point3(-v) : v;
}

struct Spread {
  Point3 centroid;
  Eigen::Vector3d eigenvalues;   // ascending
  Eigen::Matrix3d eigenvectors;  // columns match eigenvalues
};

inline Spread principal_spread(std::span<const Point3> points) {
  Point3 centroid = Point3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Point3 d = p - centroid;
    scatter += d * d.transpose();
  }
  scatter /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  return {centroid, eig.eigenvalues(), eig.eigenvectors()};
}

inline void require_finite(std::span<const Point3> points) {
  for (const auto& p : points)
    if (!p.allFinite()) throw DomainError("point coordinates must be finite");
}

}  // namespace detail

// Total-least-squares plane through the centroid, normal along the direction
// of least spread.
inline PlaneModel fit_plane(std::span<const Point3> points) {
  if (points.size() < 3) throw DegenerateGeometryError("plane fit needs at least 3 points");
  detail::require_finite(points);
  const auto s = detail::principal_spread(points);
  const double scale = s.eigenvalues(2);
  if (!(scale > 0.0) || s.eigenvalues(1) <= 1e-12 * scale)
    throw DegenerateGeometryError("plane fit: points are collinear or coincident");
  PlaneModel plane;
  plane.normal = detail::canonical_sign(s.eigenvectors.col(0).normalized());
  plane.offset = plane.normal.dot(s.centroid);
  return plane;
}

inline PlaneModel fit_plane(const PointCloud& cloud) { return fit_plane(cloud.points); }

// Total-least-squares line: anchor at the centroid, direction of largest
// spread.
inline LineModel fit_line(std::span<const Point3> points) {
  if (points.size() < 2) throw DegenerateGeometryError("line fit needs at least 2 points");
  detail::require_finite(points);
  const auto s = detail::principal_spread(points);
  if (!(s.eigenvalues(2) > 0.0)) throw DegenerateGeometryError("line fit: all points coincide");
  return {s.centroid, detail::canonical_sign(s.eigenvectors.col(2).normalized())};
}

// RMSE and population standard deviation of the perpendicular distances.
template <typename Model>
DeviationStats deviation_stats(std::span<const Point3> points, const Model& model) {
  if (points.empty()) throw DomainError("deviation stats of an empty point set");
  std::vector<double> distances;
  distances.reserve(points.size());
  for (const auto& p : points) {
    if constexpr (std::is_same_v<Model, PlaneModel>) {
      distances.push_back(std::abs(model.signed_distance(p)));
    } else {
      distances.push_back(model.distance(p));
    }
  }
  const double n = static_cast<double>(points.size());
  double sum = 0.0, sum_sq = 0.0;
  for (double d : distances) {
    sum += d;
    sum_sq += d * d;
  }
  const double mean = sum / n;
  double spread = 0.0;
  for (double d : distances) spread += (d - mean) * (d - mean);
  DeviationStats out;
  out.count = points.size();
  out.rmse = std::sqrt(sum_sq / n);
  out.std = std::sqrt(spread / n);
  return out;
}

}  // namespace irpc
