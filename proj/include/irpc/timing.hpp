#pragma once

#include <chrono>
#include <cmath>
#include <string>

#include "irpc/errors.hpp"

namespace irpc {

// All durations are carried as floating-point seconds. Integer chrono
// durations (e.g. 10ms) convert implicitly.
using Seconds = std::chrono::duration<double>;

inline constexpr Seconds milliseconds(double ms) { return Seconds{ms * 1e-3}; }

// Heating (shutter open) and cooling (shutter closed) time constants of a
// microbolometer pixel.
class TimeConstants {
 public:
  TimeConstants(Seconds tau_h, Seconds tau_c) : tau_h_(tau_h), tau_c_(tau_c) {
    if (!(std::isfinite(tau_h.count()) && tau_h.count() > 0.0))
      throw DomainError("tau_h must be positive and finite, got " + std::to_string(tau_h.count()));
    if (!(std::isfinite(tau_c.count()) && tau_c.count() > 0.0))
      throw DomainError("tau_c must be positive and finite, got " + std::to_string(tau_c.count()));
  }

  Seconds tau_h() const { return tau_h_; }
  Seconds tau_c() const { return tau_c_; }

  friend bool operator==(const TimeConstants&, const TimeConstants&) = default;

 private:
  Seconds tau_h_;
  Seconds tau_c_;
};

// Timing of one frame: exposure starts at `timestamp`, lasts `exposure`, and
// is followed by `readout` with the shutter closed.
class FrameTiming {
 public:
  FrameTiming() = default;
  FrameTiming(Seconds timestamp, Seconds exposure, Seconds readout)
      : timestamp_(timestamp), exposure_(exposure), readout_(readout) {
    if (!std::isfinite(timestamp.count()))
      throw DomainError("frame timestamp must be finite");
    if (!(std::isfinite(exposure.count()) && exposure.count() > 0.0))
      throw DomainError("exposure must be positive, got " + std::to_string(exposure.count()));
    if (!(std::isfinite(readout.count()) && readout.count() >= 0.0))
      throw DomainError("readout must be non-negative, got " + std::to_string(readout.count()));
  }

  Seconds timestamp() const { return timestamp_; }
  Seconds exposure() const { return exposure_; }
  Seconds readout() const { return readout_; }
  Seconds period() const { return exposure_ + readout_; }

  friend bool operator==(const FrameTiming&, const FrameTiming&) = default;

 private:
  Seconds timestamp_{0.0};
  Seconds exposure_{1.0};
  Seconds readout_{0.0};
};

}  // namespace irpc
