#pragma once

#include <string>
#include <vector>

#include "irpc/errors.hpp"
#include "irpc/frame.hpp"
#include "irpc/parallel.hpp"
#include "irpc/sensor_model.hpp"
#include "irpc/timing.hpp"

namespace irpc {

// Per frame-pair affine coefficients. Correction is position invariant, so a
// single pair applies to every pixel:
//   corrected = gain * (current - decay * previous)
struct CorrectionCoefficients {
  double gain = 1.0;   // 1 / (1 - exp(-t_e,i / tau_h)), >= 1
  double decay = 0.0;  // exp(-t_r,i-1 / tau_c), in (0, 1]
};

inline CorrectionCoefficients correction_coefficients(const FrameTiming& current,
                                                      const FrameTiming& previous,
                                                      const TimeConstants& taus,
                                                      double epsilon = kDefaultConditionEpsilon) {
  const double rise = heating_fraction(current.exposure(), taus.tau_h());
  if (!(rise >= epsilon))
    throw IllConditionedError("correction gain is ill-conditioned: 1 - exp(-t_e/tau_h) = " +
                              std::to_string(rise));
  return {1.0 / rise, cooling_factor(previous.readout(), taus.tau_c())};
}

// Gain-only coefficients for a frame without predecessor (zero residual).
inline CorrectionCoefficients first_frame_coefficients(const FrameTiming& current,
                                                       const TimeConstants& taus,
                                                       double epsilon = kDefaultConditionEpsilon) {
  const double rise = heating_fraction(current.exposure(), taus.tau_h());
  if (!(rise >= epsilon))
    throw IllConditionedError("correction gain is ill-conditioned: 1 - exp(-t_e/tau_h) = " +
                              std::to_string(rise));
  return {1.0 / rise, 0.0};
}

namespace detail {

inline Frame apply_coefficients(const Frame& current, const Frame* previous,
                                const CorrectionCoefficients& k) {
  std::vector<double> out(current.size());
  const auto cur = current.data();
  if (previous) {
    const auto prev = previous->data();
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = k.gain * (cur[p] - k.decay * prev[p]);
  } else {
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = k.gain * cur[p];
  }
  return Frame(current.width(), current.height(), std::move(out), current.timing());
}

}  // namespace detail

// Removes the previous frame's residual from `current` and rescales to the
// steady-state irradiance. Output is not clamped and may be negative.
inline Frame correct_frame_pair(const Frame& current, const Frame& previous, const TimeConstants& taus) {
  if (current.width() != previous.width() || current.height() != previous.height())
    throw DomainError("frame pair differs in size");
  if (!(previous.timing().timestamp() < current.timing().timestamp()))
    throw DomainError("previous frame does not precede current frame");
  const auto k = correction_coefficients(current.timing(), previous.timing(), taus);
  return detail::apply_coefficients(current, &previous, k);
}

// Corrects every frame against its raw predecessor; frame 0 receives gain
// only. Frames are independent and are processed in parallel.
inline VideoSequence correct_sequence(const VideoSequence& seq, const TimeConstants& taus,
                                      unsigned threads = default_thread_count()) {
  if (seq.empty()) throw DomainError("cannot correct an empty sequence");
  std::vector<Frame> out(seq.size());
  parallel_for(
      seq.size(),
      [&](std::size_t i) {
        try {
          if (i == 0) {
            out[0] = detail::apply_coefficients(seq[0], nullptr,
                                                first_frame_coefficients(seq[0].timing(), taus));
          } else {
            out[i] = correct_frame_pair(seq[i], seq[i - 1], taus);
          }
        } catch (const IllConditionedError& e) {
          throw IllConditionedError("frame " + std::to_string(i) + ": " + e.what());
        } catch (const DomainError& e) {
          throw DomainError("frame " + std::to_string(i) + ": " + e.what());
        }
      },
      threads);
  return VideoSequence(std::move(out));
}

}  // namespace irpc
