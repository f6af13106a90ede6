#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "irpc/errors.hpp"
#include "irpc/timing.hpp"

namespace irpc {

// PaperConsistent: the previous measurement persists additively through the
// next exposure and only one prior frame is remembered. This is the forward
// model that the closed-form correction inverts exactly.
// PhysicalODE: the pixel state is integrated through both phases of every
// frame, so the residual is attenuated while heating and memory is unbounded.
enum class SimulationMode { PaperConsistent, PhysicalODE };

inline const char* to_string(SimulationMode mode) {
  return mode == SimulationMode::PaperConsistent ? "paper" : "physical";
}

// Smallest admissible value of 1 - exp(-t_e / tau_h) before an inversion is
// treated as ill-conditioned.
inline constexpr double kDefaultConditionEpsilon = 1e-12;

namespace detail {

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

inline void require_positive(Seconds tau, const char* what) {
  if (!(std::isfinite(tau.count()) && tau.count() > 0.0))
    throw DomainError(std::string(what) + " must be positive and finite");
}

inline void require_non_negative(Seconds t, const char* what) {
  if (!(std::isfinite(t.count()) && t.count() >= 0.0))
    throw DomainError(std::string(what) + " must be non-negative and finite");
}

}  // namespace detail

// Fraction of the steady state reached after heating for `t`:
// 1 - exp(-t / tau_h), evaluated without cancellation.
inline double heating_fraction(Seconds t, Seconds tau_h) {
  return -std::expm1(-t.count() / tau_h.count());
}

// exp(-t / tau_c)
inline double cooling_factor(Seconds t, Seconds tau_c) {
  return std::exp(-t.count() / tau_c.count());
}

// Pixel value after heating for `t` towards `i_ss`, starting from `i_init`.
inline double heating_response(double i_ss, Seconds tau_h, Seconds t, double i_init = 0.0) {
  detail::require_positive(tau_h, "tau_h");
  detail::require_non_negative(t, "heating time");
  detail::require_finite(i_ss, "steady-state intensity");
  detail::require_finite(i_init, "initial intensity");
  const double rise = heating_fraction(t, tau_h);
  return i_ss * rise + i_init * (1.0 - rise);
}

// Pixel value after cooling for `t` from `i_0` with the shutter closed.
inline double cooling_response(double i_0, Seconds tau_c, Seconds t) {
  detail::require_positive(tau_c, "tau_c");
  detail::require_non_negative(t, "cooling time");
  detail::require_finite(i_0, "initial intensity");
  return i_0 * cooling_factor(t, tau_c);
}

// Recovers the steady-state intensity from a measurement taken at the end of
// an exposure that started from zero.
inline double steady_state_from_measurement(double i_m, Seconds t_e, Seconds tau_h,
                                            double epsilon = kDefaultConditionEpsilon) {
  detail::require_positive(t_e, "exposure");
  detail::require_positive(tau_h, "tau_h");
  detail::require_finite(i_m, "measured intensity");
  const double rise = heating_fraction(t_e, tau_h);
  if (!(rise >= epsilon))
    throw IllConditionedError("exposure too short to invert: 1 - exp(-t_e/tau_h) = " +
                              std::to_string(rise));
  return i_m / rise;
}

// Forward simulation of one pixel through a sequence of frames. Returns the
// measurement at the end of each exposure. Frame 0 starts from a zero
// residual.
inline std::vector<double> simulate_pixel_sequence(std::span<const double> irradiance,
                                                   std::span<const FrameTiming> timings,
                                                   const TimeConstants& taus,
                                                   SimulationMode mode) {
  if (irradiance.empty()) throw DomainError("empty irradiance sequence");
  if (irradiance.size() != timings.size())
    throw DomainError("irradiance and timing sequences differ in length");
  for (double v : irradiance)
    if (!(std::isfinite(v) && v >= 0.0))
      throw DomainError("irradiance must be finite and non-negative");

  std::vector<double> measured(irradiance.size());
  double residual = 0.0;  // pixel value at the start of the current exposure
  for (std::size_t i = 0; i < irradiance.size(); ++i) {
    const Seconds t_e = timings[i].exposure();
    if (mode == SimulationMode::PaperConsistent) {
      measured[i] = irradiance[i] * heating_fraction(t_e, taus.tau_h()) + residual;
    } else {
      measured[i] = heating_response(irradiance[i], taus.tau_h(), t_e, residual);
    }
    residual = cooling_response(measured[i], taus.tau_c(), timings[i].readout());
  }
  return measured;
}

}  // namespace irpc
