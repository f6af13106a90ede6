#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "irpc/errors.hpp"
#include "irpc/frame.hpp"
#include "irpc/parallel.hpp"
#include "irpc/sensor_model.hpp"
#include "irpc/timing.hpp"

namespace irpc {

// Sparse eight-pixel residual pattern (diamond of radius two).
inline std::vector<PixelCoord> default_pattern() {
  return {{0, -2}, {-1, -1}, {1, -1}, {-2, 0}, {0, 0}, {2, 0}, {-1, 1}, {0, 2}};
}

// Pixel `point_p` in reference frame `frame_i` observes the same scene point
// as `point_p_prime` in target frame `frame_j`. Both frames need a
// predecessor, so indices start at 1.
struct Correspondence {
  std::size_t frame_i = 1;
  PixelCoord point_p;
  std::size_t frame_j = 2;
  PixelCoord point_p_prime;
  std::vector<PixelCoord> pattern = {{0, 0}};

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

struct RobustKernel {
  double gamma = 9.0;          // Huber threshold, intensity units
  double weight_const = 50.0;  // gradient scale of the per-pixel weight
};

struct EnergyReport {
  double total_energy = 0.0;
  std::vector<double> per_term_residuals;  // raw residuals, correspondence-major
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();               // (dE/dtau_h, dE/dtau_c), 1/s
  Eigen::Matrix2d gauss_newton_hessian = Eigen::Matrix2d::Zero();  // in (tau_h, tau_c)
};

// Exposure ratio that maps the reference frame's steady-state response onto
// the target frame's.
inline double beta_factor(const FrameTiming& timing_i, const FrameTiming& timing_j, Seconds tau_h,
                          double epsilon = kDefaultConditionEpsilon) {
  detail::require_positive(tau_h, "tau_h");
  const double rise_i = heating_fraction(timing_i.exposure(), tau_h);
  if (!(rise_i >= epsilon))
    throw IllConditionedError("beta denominator underflow: 1 - exp(-t_e,i/tau_h) = " + std::to_string(rise_i));
  return heating_fraction(timing_j.exposure(), tau_h) / rise_i;
}

inline double huber(double residual, double gamma) {
  const double a = std::abs(residual);
  return a <= gamma ? residual * residual : gamma * (2.0 * a - gamma);
}

// Derivative of huber() divided by 2r: 1 on the quadratic branch, gamma/|r|
// on the linear branch.
inline double huber_irls_weight(double residual, double gamma) {
  const double a = std::abs(residual);
  return a <= gamma ? 1.0 : gamma / a;
}

inline double gradient_weight(double gradient_magnitude, double weight_const) {
  const double c2 = weight_const * weight_const;
  return c2 / (c2 + gradient_magnitude * gradient_magnitude);
}

namespace detail {

inline std::string describe(const Correspondence& c) {
  return "correspondence (frame " + std::to_string(c.frame_i) + " @" + std::to_string(c.point_p.x) + "," +
         std::to_string(c.point_p.y) + " -> frame " + std::to_string(c.frame_j) + " @" +
         std::to_string(c.point_p_prime.x) + "," + std::to_string(c.point_p_prime.y) + ")";
}

inline void validate(const Correspondence& c, const VideoSequence& seq) {
  if (c.frame_i == c.frame_j) throw DomainError(describe(c) + ": reference and target frame coincide");
  if (c.frame_i < 1 || c.frame_j < 1)
    throw DomainError(describe(c) + ": frames need a predecessor (index >= 1)");
  if (c.frame_i >= seq.size() || c.frame_j >= seq.size())
    throw DomainError(describe(c) + ": frame index outside sequence");
  if (c.pattern.empty()) throw DomainError(describe(c) + ": empty pattern");
  const Frame& f = seq[0];
  for (const PixelCoord& o : c.pattern)
    if (!f.contains(c.point_p + o) || !f.contains(c.point_p_prime + o))
      throw DomainError(describe(c) + ": pattern offset (" + std::to_string(o.x) + "," + std::to_string(o.y) +
                        ") leaves the frame");
}

// Per-frame quantities that depend on the time constants, with their
// derivatives. decay[k] is the cooling of frame k-1's residual before frame k.
struct FrameFactors {
  std::vector<double> rise, d_rise;    // 1 - exp(-t_e/tau_h), d/dtau_h
  std::vector<double> decay, d_decay;  // exp(-t_r,k-1/tau_c), d/dtau_c
};

inline FrameFactors frame_factors(const VideoSequence& seq, const TimeConstants& taus) {
  const double th = taus.tau_h().count();
  const double tc = taus.tau_c().count();
  FrameFactors f;
  const std::size_t n = seq.size();
  f.rise.resize(n);
  f.d_rise.resize(n);
  f.decay.assign(n, 0.0);
  f.d_decay.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double te = seq[k].timing().exposure().count();
    f.rise[k] = -std::expm1(-te / th);
    f.d_rise[k] = -std::exp(-te / th) * te / (th * th);
    if (k > 0) {
      const double tr = seq[k - 1].timing().readout().count();
      f.decay[k] = std::exp(-tr / tc);
      f.d_decay[k] = f.decay[k] * tr / (tc * tc);
    }
  }
  return f;
}

struct TermValue {
  double residual;
  Eigen::Vector2d jacobian;  // d residual / d(tau_h, tau_c)
};

inline TermValue evaluate_term(const Correspondence& c, PixelCoord offset, const VideoSequence& seq,
                               const FrameFactors& f, double epsilon) {
  const std::size_t i = c.frame_i, j = c.frame_j;
  if (!(f.rise[i] >= epsilon))
    throw IllConditionedError("beta is ill-conditioned for frame pair (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
  const PixelCoord p = c.point_p + offset;
  const PixelCoord q = c.point_p_prime + offset;
  const double a_j = seq[j](q.x, q.y), b_j = seq[j - 1](q.x, q.y);
  const double a_i = seq[i](p.x, p.y), b_i = seq[i - 1](p.x, p.y);
  const double beta = f.rise[j] / f.rise[i];
  const double d_beta = (f.d_rise[j] - beta * f.d_rise[i]) / f.rise[i];
  const double u_j = a_j - f.decay[j] * b_j;
  const double u_i = a_i - f.decay[i] * b_i;
  TermValue t;
  t.residual = u_j - beta * u_i;
  t.jacobian(0) = -u_i * d_beta;
  t.jacobian(1) = -b_j * f.d_decay[j] + beta * b_i * f.d_decay[i];
  return t;
}

}  // namespace detail

// Raw (unweighted, pre-Huber) residual of one pattern offset:
//   (I_j[p'] - decay_j I_{j-1}[p']) - beta (I_i[p] - decay_i I_{i-1}[p])
inline double residual_term(const Correspondence& corr, const VideoSequence& seq, const TimeConstants& taus,
                            PixelCoord offset = {0, 0}, double epsilon = kDefaultConditionEpsilon) {
  Correspondence probe = corr;
  probe.pattern = {offset};
  detail::validate(probe, seq);
  const auto f = detail::frame_factors(seq, taus);
  return detail::evaluate_term(probe, offset, seq, f, epsilon).residual;
}

// Robust weighted energy over all correspondences with its analytic gradient
// and Gauss-Newton matrix in (tau_h, tau_c). Huber enters through IRLS
// weights, so the gradient is exact and the matrix is positive semidefinite.
// Accumulation order is fixed (blocks of correspondences, summed in order),
// so results do not depend on the thread count.
inline EnergyReport energy_and_derivatives(std::span<const Correspondence> correspondences,
                                           const VideoSequence& seq, const TimeConstants& taus,
                                           const RobustKernel& kernel,
                                           unsigned threads = default_thread_count(),
                                           double epsilon = kDefaultConditionEpsilon) {
  if (correspondences.empty()) throw DomainError("no correspondences");
  if (!(kernel.gamma > 0.0) || !(kernel.weight_const > 0.0))
    throw DomainError("robust kernel parameters must be positive");
  for (const auto& c : correspondences) detail::validate(c, seq);

  const auto f = detail::frame_factors(seq, taus);

  std::vector<std::size_t> offsets(correspondences.size() + 1, 0);
  for (std::size_t k = 0; k < correspondences.size(); ++k)
    offsets[k + 1] = offsets[k] + correspondences[k].pattern.size();

  struct Partial {
    double energy = 0.0;
    Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  };
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (correspondences.size() + kBlock - 1) / kBlock;
  std::vector<Partial> partials(blocks);

  EnergyReport report;
  report.per_term_residuals.resize(offsets.back());

  parallel_for(
      blocks,
      [&](std::size_t b) {
        Partial acc;
        const std::size_t end = std::min(correspondences.size(), (b + 1) * kBlock);
        for (std::size_t k = b * kBlock; k < end; ++k) {
          const Correspondence& c = correspondences[k];
          const Frame& ref = seq[c.frame_i];
          for (std::size_t o = 0; o < c.pattern.size(); ++o) {
            const auto term = detail::evaluate_term(c, c.pattern[o], seq, f, epsilon);
            report.per_term_residuals[offsets[k] + o] = term.residual;
            const double w = gradient_weight(ref.gradient_magnitude(c.point_p + c.pattern[o]), kernel.weight_const);
            const double irls = huber_irls_weight(term.residual, kernel.gamma);
            acc.energy += w * huber(term.residual, kernel.gamma);
            acc.gradient += (2.0 * w * irls * term.residual) * term.jacobian;
            const double s = 2.0 * w * irls;
            const double off = s * (term.jacobian(0) * term.jacobian(1));
            acc.hessian(0, 0) += s * (term.jacobian(0) * term.jacobian(0));
            acc.hessian(1, 1) += s * (term.jacobian(1) * term.jacobian(1));
            acc.hessian(0, 1) += off;
            acc.hessian(1, 0) += off;
          }
        }
        partials[b] = acc;
      },
      threads);

  for (const Partial& p : partials) {
    report.total_energy += p.energy;
    report.gradient += p.gradient;
    report.gauss_newton_hessian += p.hessian;
  }
  return report;
}

}  // namespace irpc
