#pragma once

// Independent reference implementations used by the tests. Nothing here
// calls into the library code it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace oracle {

// Fixed-step classical Runge-Kutta for dy/dt = f(y) over [0, t]. The last
// step is shortened to land exactly on t.
inline double rk4(const std::function<double(double)>& f, double y, double t, double h) {
  double done = 0.0;
  while (done < t) {
    const double s = std::min(h, t - done);
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * s * k1);
    const double k3 = f(y + 0.5 * s * k2);
    const double k4 = f(y + s * k3);
    y += s / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    done += s;
  }
  return y;
}

// Shutter open: tau_h dI/dt = I_ss - I.
inline double heating(double i_ss, double tau_h, double t, double i_init, double h = 1e-6) {
  return rk4([&](double y) { return (i_ss - y) / tau_h; }, i_init, t, h);
}

// Shutter closed: tau_c dI/dt = -I.
inline double cooling(double i_0, double tau_c, double t, double h = 1e-6) {
  return rk4([&](double y) { return -y / tau_c; }, i_0, t, h);
}

using Path = std::vector<Eigen::Vector3d>;

// Visits every monotone coupling of a and b (steps (1,0), (0,1), (1,1)) and
// reports the leash lengths along it, in path order.
inline void for_each_coupling(const Path& a, const Path& b, const std::function<void(const std::vector<double>&)>& fn) {
  std::vector<double> leash;
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t i, std::size_t j) {
    leash.push_back((a[i] - b[j]).norm());
    if (i + 1 == a.size() && j + 1 == b.size()) {
      fn(leash);
    } else {
      if (i + 1 < a.size()) walk(i + 1, j);
      if (j + 1 < b.size()) walk(i, j + 1);
      if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1);
    }
    leash.pop_back();
  };
  walk(0, 0);
}

inline double brute_frechet(const Path& a, const Path& b) {
  double best = std::numeric_limits<double>::infinity();
  for_each_coupling(a, b, [&](const std::vector<double>& l) {
    best = std::min(best, *std::max_element(l.begin(), l.end()));
  });
  return best;
}

inline double brute_dtw(const Path& a, const Path& b) {
  double best = std::numeric_limits<double>::infinity();
  for_each_coupling(a, b, [&](const std::vector<double>& l) {
    double sum = 0.0;
    for (double d : l) sum += d;
    best = std::min(best, sum);
  });
  return best;
}

// Central difference of a scalar function.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
