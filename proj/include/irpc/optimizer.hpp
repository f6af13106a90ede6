#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "irpc/errors.hpp"
#include "irpc/frame.hpp"
#include "irpc/photometric_error.hpp"
#include "irpc/timing.hpp"

namespace irpc {

struct WindowConfig {
  std::size_t window_size = 8;  // frames per sliding window
  int max_iterations = 50;
  double step_tolerance = 1e-9;     // on the log-parameter step (relative change of tau)
  double energy_tolerance = 1e-12;  // on the relative energy decrease of an accepted step
  double damping_init = 1e-4;       // 0 gives plain Gauss-Newton until a step is rejected

  void validate() const {
    if (window_size < 2) throw DomainError("window_size must be at least 2");
    if (max_iterations < 1) throw DomainError("max_iterations must be at least 1");
    if (!(step_tolerance > 0.0) || !(energy_tolerance > 0.0)) throw DomainError("tolerances must be positive");
    if (!(damping_init >= 0.0)) throw DomainError("damping_init must be non-negative");
  }
};

struct EstimationResult {
  TimeConstants taus{Seconds{1.0}, Seconds{1.0}};
  int iterations_used = 0;
  double final_energy = 0.0;
  bool converged = false;
  std::vector<double> energy_trace;  // initial energy, then one entry per accepted step
  // Gauss-Newton matrix in (log tau_h, log tau_c) at the returned estimate.
  Eigen::Matrix2d normal_matrix = Eigen::Matrix2d::Zero();
  double condition_number = std::numeric_limits<double>::infinity();
};

// Ratio of extreme eigenvalues of a symmetric PSD matrix; infinite when the
// smallest eigenvalue is not positive.
inline double condition_number(const Eigen::Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(1);
  if (!(lo > 0.0) || !std::isfinite(hi)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

namespace detail {

struct LogSpaceModel {
  double energy;
  Eigen::Vector2d gradient;
  Eigen::Matrix2d hessian;
};

inline LogSpaceModel log_space_model(std::span<const Correspondence> corrs, const VideoSequence& seq,
                                     const Eigen::Vector2d& theta, const RobustKernel& kernel) {
  const TimeConstants taus{Seconds{std::exp(theta(0))}, Seconds{std::exp(theta(1))}};
  const EnergyReport rep = energy_and_derivatives(corrs, seq, taus, kernel);
  // d tau / d log tau = tau
  const Eigen::Vector2d scale(taus.tau_h().count(), taus.tau_c().count());
  return {rep.total_energy, scale.asDiagonal() * rep.gradient,
          scale.asDiagonal() * rep.gauss_newton_hessian * scale.asDiagonal()};
}

inline TimeConstants to_taus(const Eigen::Vector2d& theta) {
  return {Seconds{std::exp(theta(0))}, Seconds{std::exp(theta(1))}};
}

}  // namespace detail

// Levenberg-damped Gauss-Newton on (log tau_h, log tau_c) minimising the
// robust photometric energy of the given correspondences.
inline EstimationResult estimate_time_constants(const VideoSequence& seq,
                                                std::span<const Correspondence> correspondences,
                                                const TimeConstants& init, const WindowConfig& config,
                                                const RobustKernel& kernel) {
  config.validate();
  constexpr double kMaxDamping = 1e12;

  Eigen::Vector2d theta(std::log(init.tau_h().count()), std::log(init.tau_c().count()));
  auto model = detail::log_space_model(correspondences, seq, theta, kernel);

  EstimationResult result;
  result.energy_trace.push_back(model.energy);
  double damping = config.damping_init;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    result.iterations_used = iter;
    const double scale = model.hessian.diagonal().maxCoeff();
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw DegenerateDataError("normal equations carry no information about the time constants");

    Eigen::Vector2d step;
    for (;;) {
      const Eigen::Matrix2d damped = model.hessian + damping * scale * Eigen::Matrix2d::Identity();
      Eigen::LLT<Eigen::Matrix2d> llt(damped);
      if (llt.info() == Eigen::Success) {
        step = -llt.solve(model.gradient);
        if (step.allFinite()) break;
      }
      damping = damping == 0.0 ? 1e-12 : damping * 10.0;
      if (damping > kMaxDamping)
        throw DegenerateDataError("normal equations remain singular after damping escalation");
    }

    if (step.cwiseAbs().maxCoeff() < config.step_tolerance) {
      result.converged = true;
      break;
    }

    const Eigen::Vector2d candidate = theta + step;
    std::optional<detail::LogSpaceModel> trial;
    try {
      trial = detail::log_space_model(correspondences, seq, candidate, kernel);
    } catch (const IllConditionedError&) {
      // treated as an energy increase
    }

    if (trial && trial->energy <= model.energy) {
      const double decrease = model.energy - trial->energy;
      const double relative = model.energy > 0.0 ? decrease / model.energy : 0.0;
      theta = candidate;
      model = *trial;
      result.energy_trace.push_back(model.energy);
      damping /= 10.0;
      if (relative < config.energy_tolerance || model.energy == 0.0) {
        result.converged = true;
        break;
      }
    } else {
      damping = damping == 0.0 ? config.damping_init > 0.0 ? config.damping_init : 1e-4 : damping * 10.0;
      if (damping > kMaxDamping) break;
    }
  }

  result.taus = detail::to_taus(theta);
  result.final_energy = model.energy;
  result.normal_matrix = model.hessian;
  result.condition_number = condition_number(model.hessian);
  return result;
}

struct WindowEstimate {
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;
  std::size_t correspondences = 0;
  EstimationResult result;
};

struct SlidingEstimate {
  std::vector<WindowEstimate> windows;
  TimeConstants aggregate{Seconds{1.0}, Seconds{1.0}};
  std::size_t skipped_windows = 0;  // windows without correspondences or with degenerate data
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Slides a window of `config.window_size` frames one frame at a time over
// the sequence, estimating the time constants from the correspondences that
// fall entirely inside each window. Each window is warm-started from the
// previous estimate. The aggregate is the component-wise median over the
// converged windows (over all windows when none converged).
inline SlidingEstimate estimate_sliding_windows(const VideoSequence& seq,
                                                std::span<const Correspondence> correspondences,
                                                const TimeConstants& init, const WindowConfig& config,
                                                const RobustKernel& kernel) {
  config.validate();
  if (seq.size() < 2) throw DomainError("need at least two frames");
  // Frame 0 has no predecessor and cannot take part in a correspondence.
  const std::size_t first = 1, last = seq.size() - 1;
  const std::size_t span = std::min(config.window_size, last - first + 1);

  SlidingEstimate out;
  TimeConstants current = init;
  std::optional<DegenerateDataError> last_error;
  for (std::size_t start = first; start + span - 1 <= last; ++start) {
    const std::size_t stop = start + span - 1;
    std::vector<Correspondence> in_window;
    for (const auto& c : correspondences) {
      if (std::min(c.frame_i, c.frame_j) >= start && std::max(c.frame_i, c.frame_j) <= stop)
        in_window.push_back(c);
    }
    if (in_window.empty()) {
      ++out.skipped_windows;
      continue;
    }
    try {
      WindowEstimate w{start, stop, in_window.size(),
                       estimate_time_constants(seq, in_window, current, config, kernel)};
      current = w.result.taus;
      out.windows.push_back(std::move(w));
    } catch (const DegenerateDataError& e) {
      ++out.skipped_windows;
      last_error = e;
    }
  }
  if (out.windows.empty()) {
    if (last_error) throw *last_error;
    throw DegenerateDataError("no window contains correspondences");
  }

  std::vector<double> th, tc;
  for (const auto& w : out.windows)
    if (w.result.converged) {
      th.push_back(w.result.taus.tau_h().count());
      tc.push_back(w.result.taus.tau_c().count());
    }
  if (th.empty())
    for (const auto& w : out.windows) {
      th.push_back(w.result.taus.tau_h().count());
      tc.push_back(w.result.taus.tau_c().count());
    }
  out.aggregate = TimeConstants{Seconds{detail::median(th)}, Seconds{detail::median(tc)}};
  return out;
}

}  // namespace irpc
