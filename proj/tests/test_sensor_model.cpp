#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "irpc/random.hpp"
#include "irpc/sensor_model.hpp"
#include "oracles.hpp"

using namespace irpc;

namespace {

const TimeConstants kTen{milliseconds(10), milliseconds(10)};
const FrameTiming kFrame30{Seconds{0.0}, milliseconds(10), Seconds{1.0 / 30.0 - 0.01}};

std::vector<FrameTiming> random_timings(Rng& rng, std::size_t n) {
  std::vector<FrameTiming> out;
  double t = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double te = rng.uniform(2e-3, 25e-3), tr = rng.uniform(0.0, 30e-3);
    out.emplace_back(Seconds{t}, Seconds{te}, Seconds{tr});
    t += te + tr;
  }
  return out;
}

}  // namespace

TEST(Heating, ClosedFormExamples) {
  EXPECT_EQ(heating_response(100.0, milliseconds(10), Seconds{0.0}), 0.0);
  // frozen from the RK4 oracle at 1 us steps
  EXPECT_NEAR(heating_response(100.0, milliseconds(10), milliseconds(10)), 63.212055882855765, 1e-12);
  EXPECT_NEAR(heating_response(100.0, milliseconds(10), Seconds{10.0}), 100.0, 1e-7);
}

TEST(Heating, MatchesRk4) {
  EXPECT_NEAR(oracle::heating(100.0, 0.01, 0.01, 0.0), heating_response(100.0, milliseconds(10), milliseconds(10)),
              1e-9);
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    const double iss = rng.uniform(0.0, 1e4), init = rng.uniform(0.0, 1e4);
    const double tau = rng.uniform(5e-3, 30e-3), t = rng.uniform(0.0, 40e-3);
    const double want = oracle::heating(iss, tau, t, init);
    EXPECT_NEAR(heating_response(iss, Seconds{tau}, Seconds{t}, init), want, 1e-6 * std::abs(want) + 1e-9);
  }
}

TEST(Heating, MonotoneWhenStartingBelowSteadyState) {
  Rng rng(12);
  for (int k = 0; k < 200; ++k) {
    const double iss = rng.uniform(0.0, 1e4), init = rng.uniform(0.0, iss);
    const Seconds tau{rng.uniform(5e-3, 30e-3)};
    double last = -1.0;
    for (double t = 0.0; t < 0.1; t += 1e-3) {
      const double v = heating_response(iss, tau, Seconds{t}, init);
      EXPECT_GE(v, last);
      last = v;
    }
  }
}

TEST(Heating, RejectsInvalidInput) {
  EXPECT_THROW(heating_response(1.0, Seconds{0.0}, Seconds{1.0}), DomainError);
  EXPECT_THROW(heating_response(1.0, Seconds{-1.0}, Seconds{1.0}), DomainError);
  EXPECT_THROW(heating_response(1.0, Seconds{1.0}, Seconds{-1e-3}), DomainError);
  EXPECT_THROW(heating_response(NAN, Seconds{1.0}, Seconds{1.0}), DomainError);
  EXPECT_THROW(heating_response(1.0, Seconds{1.0}, Seconds{1.0}, INFINITY), DomainError);
}

TEST(Cooling, ClosedFormExamples) {
  EXPECT_EQ(cooling_response(100.0, milliseconds(10), Seconds{0.0}), 100.0);
  EXPECT_NEAR(cooling_response(100.0, milliseconds(10), kFrame30.readout()), 9.697196786440509, 1e-12);
  EXPECT_EQ(cooling_response(0.0, milliseconds(15), milliseconds(5)), 0.0);
  EXPECT_NEAR(oracle::cooling(100.0, 0.01, 1.0 / 30.0 - 0.01), 9.697196786440509, 1e-9);
}

TEST(Cooling, MonotoneAndValidated) {
  double last = 1e9;
  for (double t = 0.0; t < 0.1; t += 1e-3) {
    const double v = cooling_response(500.0, milliseconds(12), Seconds{t});
    EXPECT_LE(v, last);
    last = v;
  }
  EXPECT_THROW(cooling_response(1.0, Seconds{0.0}, Seconds{1.0}), DomainError);
  EXPECT_THROW(cooling_response(1.0, Seconds{1.0}, Seconds{-1.0}), DomainError);
}

TEST(SteadyState, Examples) {
  EXPECT_NEAR(steady_state_from_measurement(100.0, milliseconds(10), milliseconds(10)), 158.19767068693264, 1e-10);
  EXPECT_NEAR(steady_state_from_measurement(100.0, Seconds{10.0}, milliseconds(10)), 100.0, 1e-7);
  EXPECT_NEAR(steady_state_from_measurement(63.212, milliseconds(10), milliseconds(10)), 100.0, 1e-4);
}

TEST(SteadyState, InvertsHeating) {
  Rng rng(13);
  for (int k = 0; k < 500; ++k) {
    const double x = rng.uniform(0.0, 1e4);
    const Seconds tau{rng.uniform(1e-3, 50e-3)}, t{rng.uniform(1e-4, 50e-3)};
    const double back = steady_state_from_measurement(heating_response(x, tau, t), t, tau);
    EXPECT_NEAR(back, x, 1e-12 * x + 1e-12);
  }
}

TEST(SteadyState, IllConditionedForTinyExposure) {
  EXPECT_THROW(steady_state_from_measurement(1.0, Seconds{1e-16}, Seconds{1.0}), IllConditionedError);
  EXPECT_NO_THROW(steady_state_from_measurement(1.0, Seconds{1e-16}, Seconds{1.0}, 1e-20));
  EXPECT_THROW(steady_state_from_measurement(1.0, Seconds{0.0}, Seconds{1.0}), DomainError);
}

TEST(Simulate, Examples) {
  const std::vector<double> one{100.0};
  const std::vector<FrameTiming> t1{kFrame30};
  const auto s1 = simulate_pixel_sequence(one, t1, kTen, SimulationMode::PaperConsistent);
  ASSERT_EQ(s1.size(), 1u);
  EXPECT_NEAR(s1[0], 63.212055882855765, 1e-12);

  const std::vector<double> two{100.0, 100.0};
  const std::vector<FrameTiming> t2{kFrame30, FrameTiming{Seconds{1.0 / 30.0}, milliseconds(10),
                                                          Seconds{1.0 / 30.0 - 0.01}}};
  const auto s2 = simulate_pixel_sequence(two, t2, kTen, SimulationMode::PaperConsistent);
  EXPECT_NEAR(s2[1], 69.34185333457103, 1e-11);

  const std::vector<double> zeros{0.0, 0.0, 0.0};
  const std::vector<FrameTiming> t3{t2[0], t2[1], FrameTiming{Seconds{2.0 / 30.0}, milliseconds(5), milliseconds(20)}};
  for (auto mode : {SimulationMode::PaperConsistent, SimulationMode::PhysicalODE})
    for (double v : simulate_pixel_sequence(zeros, t3, kTen, mode)) EXPECT_EQ(v, 0.0);
}

TEST(Simulate, RejectsBadInput) {
  const std::vector<double> one{1.0}, neg{-1.0}, empty;
  const std::vector<FrameTiming> t1{kFrame30}, t2{kFrame30, kFrame30};
  EXPECT_THROW(simulate_pixel_sequence(one, t2, kTen, SimulationMode::PaperConsistent), DomainError);
  EXPECT_THROW(simulate_pixel_sequence(neg, t1, kTen, SimulationMode::PaperConsistent), DomainError);
  EXPECT_THROW(simulate_pixel_sequence(empty, {}, kTen, SimulationMode::PaperConsistent), DomainError);
  EXPECT_THROW(FrameTiming(Seconds{0.0}, Seconds{0.0}, Seconds{0.0}), DomainError);
  EXPECT_THROW(FrameTiming(Seconds{0.0}, Seconds{1e-3}, Seconds{-1e-3}), DomainError);
  EXPECT_THROW(TimeConstants(Seconds{0.0}, Seconds{1.0}), DomainError);
  EXPECT_THROW(TimeConstants(Seconds{1.0}, Seconds{INFINITY}), DomainError);
}

TEST(Simulate, LinearInIrradiance) {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    const auto timings = random_timings(rng, n);
    std::vector<double> irr(n), scaled(n);
    const double alpha = rng.uniform(0.0, 5.0);
    for (std::size_t k = 0; k < n; ++k) {
      irr[k] = rng.uniform(0.0, 1e4);
      scaled[k] = alpha * irr[k];
    }
    const TimeConstants taus{Seconds{rng.uniform(5e-3, 20e-3)}, Seconds{rng.uniform(5e-3, 20e-3)}};
    for (auto mode : {SimulationMode::PaperConsistent, SimulationMode::PhysicalODE}) {
      const auto a = simulate_pixel_sequence(irr, timings, taus, mode);
      const auto b = simulate_pixel_sequence(scaled, timings, taus, mode);
      for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(b[k], alpha * a[k], 1e-12 * std::abs(alpha * a[k]) + 1e-12);
    }
  }
}

TEST(Simulate, PaperModeInvertsExactly) {
  Rng rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(10);
    const auto timings = random_timings(rng, n);
    std::vector<double> irr(n);
    for (double& v : irr) v = rng.uniform(1.0, 1e4);
    const TimeConstants taus{Seconds{rng.uniform(5e-3, 20e-3)}, Seconds{rng.uniform(5e-3, 20e-3)}};
    const auto raw = simulate_pixel_sequence(irr, timings, taus, SimulationMode::PaperConsistent);
    for (std::size_t i = 1; i < n; ++i) {
      const double decay = cooling_factor(timings[i - 1].readout(), taus.tau_c());
      const double back = (raw[i] - decay * raw[i - 1]) / heating_fraction(timings[i].exposure(), taus.tau_h());
      EXPECT_NEAR(back, irr[i], 1e-9 * irr[i]);
    }
  }
}

// Starting from the same measured previous value, the two modes differ only
// in whether the residual keeps decaying during the exposure.
TEST(Simulate, ModeDiscrepancyBound) {
  Rng rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(10);
    const auto timings = random_timings(rng, n);
    std::vector<double> irr(n);
    for (double& v : irr) v = rng.uniform(0.0, 1e4);
    const TimeConstants taus{Seconds{rng.uniform(5e-3, 20e-3)}, Seconds{rng.uniform(5e-3, 20e-3)}};
    const auto paper = simulate_pixel_sequence(irr, timings, taus, SimulationMode::PaperConsistent);
    const auto phys = simulate_pixel_sequence(irr, timings, taus, SimulationMode::PhysicalODE);
    EXPECT_EQ(paper[0], phys[0]);
    for (std::size_t i = 1; i < n; ++i) {
      const double residual = cooling_response(phys[i - 1], taus.tau_c(), timings[i - 1].readout());
      const double rise = heating_fraction(timings[i].exposure(), taus.tau_h());
      const double paper_step = irr[i] * rise + residual;
      EXPECT_LE(std::abs(phys[i] - paper_step), residual * rise * (1.0 + 1e-12) + 1e-9);
      EXPECT_NEAR(paper_step - phys[i], residual * rise, 1e-9 * std::max(1.0, residual));
    }
    // At i = 1 both modes start from the same residual, so the bound holds
    // literally against the paper-mode output.
    const double r0 = cooling_response(paper[0], taus.tau_c(), timings[0].readout());
    EXPECT_LE(std::abs(phys[1] - paper[1]), r0 * heating_fraction(timings[1].exposure(), taus.tau_h()) + 1e-9);
  }
}

TEST(Simulate, PhysicalModeMatchesOdeIntegration) {
  Rng rng(17);
  const auto timings = random_timings(rng, 4);
  const std::vector<double> irr{1000.0, 3000.0, 500.0, 2000.0};
  const TimeConstants taus{milliseconds(9), milliseconds(13)};
  const auto phys = simulate_pixel_sequence(irr, timings, taus, SimulationMode::PhysicalODE);
  double state = 0.0;
  for (std::size_t i = 0; i < irr.size(); ++i) {
    state = oracle::heating(irr[i], 9e-3, timings[i].exposure().count(), state);
    EXPECT_NEAR(phys[i], state, 1e-6 * state);
    state = oracle::cooling(state, 13e-3, timings[i].readout().count());
  }
}
