#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "irpc/correction.hpp"
#include "irpc/random.hpp"

using namespace irpc;

namespace {

const TimeConstants kTen{milliseconds(10), milliseconds(10)};
const Seconds kReadout30{1.0 / 30.0 - 0.01};

FrameTiming timing_at(double t, double te_ms, double tr_s) { return {Seconds{t}, milliseconds(te_ms), Seconds{tr_s}}; }

Frame random_frame(Rng& rng, int w, int h, const FrameTiming& timing) {
  std::vector<double> d(static_cast<std::size_t>(w) * h);
  for (double& v : d) v = rng.uniform(0.0, 5000.0);
  return Frame(w, h, std::move(d), timing);
}

// Raw video of a per-pixel irradiance film, built with the scalar simulator.
VideoSequence simulate(const std::vector<Frame>& film, const TimeConstants& taus) {
  std::vector<FrameTiming> timings;
  for (const auto& f : film) timings.push_back(f.timing());
  std::vector<std::vector<double>> data(film.size(), std::vector<double>(film[0].size()));
  for (std::size_t p = 0; p < film[0].size(); ++p) {
    std::vector<double> irr;
    for (const auto& f : film) irr.push_back(f.data()[p]);
    const auto raw = simulate_pixel_sequence(irr, timings, taus, SimulationMode::PaperConsistent);
    for (std::size_t k = 0; k < film.size(); ++k) data[k][p] = raw[k];
  }
  std::vector<Frame> frames;
  for (std::size_t k = 0; k < film.size(); ++k)
    frames.emplace_back(film[0].width(), film[0].height(), data[k], timings[k]);
  return VideoSequence(std::move(frames));
}

}  // namespace

TEST(Coefficients, Examples) {
  const auto k = correction_coefficients(timing_at(1.0 / 30, 10, 0.0), timing_at(0, 10, kReadout30.count()), kTen);
  EXPECT_NEAR(k.gain, 1.5819767068693265, 1e-13);
  EXPECT_NEAR(k.decay, 0.0969719678644051, 1e-15);

  const auto far = correction_coefficients(timing_at(20, 10000, 0), timing_at(0, 10, 10.0), kTen);
  EXPECT_NEAR(far.gain, 1.0, 1e-9);
  EXPECT_NEAR(far.decay, 0.0, 1e-9);

  const auto no_readout =
      correction_coefficients(timing_at(1, 10, 0), timing_at(0, 10, 0.0), {milliseconds(10), milliseconds(3)});
  EXPECT_EQ(no_readout.decay, 1.0);
}

TEST(Coefficients, IllConditioned) {
  EXPECT_THROW(correction_coefficients(FrameTiming{Seconds{1}, Seconds{1e-18}, Seconds{0}},
                                       timing_at(0, 10, 0.0), kTen),
               IllConditionedError);
}

TEST(Coefficients, Monotonicity) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const double te = rng.uniform(1e-3, 30e-3), te2 = te + rng.uniform(0.0, 10e-3);
    const double th = rng.uniform(5e-3, 20e-3), th2 = th + rng.uniform(0.0, 10e-3);
    const double tr = rng.uniform(0.0, 30e-3), tr2 = tr + rng.uniform(0.0, 10e-3);
    const double tc = rng.uniform(5e-3, 20e-3);
    auto coef = [&](double e, double h, double r) {
      return correction_coefficients(FrameTiming{Seconds{1}, Seconds{e}, Seconds{0}},
                                     FrameTiming{Seconds{0}, Seconds{1e-3}, Seconds{r}},
                                     {Seconds{h}, Seconds{tc}});
    };
    const auto base = coef(te, th, tr);
    EXPECT_GE(base.gain, 1.0);
    EXPECT_GT(base.decay, 0.0);
    EXPECT_LE(base.decay, 1.0);
    EXPECT_LE(coef(te2, th, tr).gain, base.gain);
    EXPECT_GE(coef(te, th2, tr).gain, base.gain);
    EXPECT_LE(coef(te, th, tr2).decay, base.decay);
  }
}

TEST(FramePair, HandExample) {
  const Frame prev(4, 3, 80.0, timing_at(0, 10, kReadout30.count()));
  const Frame curr(4, 3, 120.0, timing_at(1.0 / 30, 10, kReadout30.count()));
  const Frame out = correct_frame_pair(curr, prev, kTen);
  for (double v : out.data()) EXPECT_NEAR(v, 177.5646132738576, 1e-10);
  EXPECT_EQ(out.timing(), curr.timing());
}

TEST(FramePair, LongExposureWithoutResidualIsIdentity) {
  Rng rng(22);
  const Frame prev(5, 5, 0.0, timing_at(0, 10, 0.0));
  const Frame curr = random_frame(rng, 5, 5, FrameTiming{Seconds{1}, Seconds{10.0}, Seconds{0}});
  const Frame out = correct_frame_pair(curr, prev, kTen);
  for (std::size_t p = 0; p < out.size(); ++p) EXPECT_NEAR(out.data()[p], curr.data()[p], 1e-9 * curr.data()[p]);
}

TEST(FramePair, Errors) {
  const Frame a(4, 4, 1.0, timing_at(0, 10, 0.02));
  const Frame b(4, 4, 1.0, timing_at(1, 10, 0.02));
  const Frame small(3, 4, 1.0, timing_at(1, 10, 0.02));
  EXPECT_THROW(correct_frame_pair(small, a, kTen), DomainError);
  EXPECT_THROW(correct_frame_pair(a, b, kTen), DomainError);
  EXPECT_THROW(correct_frame_pair(a, a, kTen), DomainError);
}

TEST(FramePair, NotClamped) {
  const Frame prev(2, 2, 5000.0, timing_at(0, 10, 0.0));
  const Frame curr(2, 2, 10.0, timing_at(1, 10, 0.0));
  EXPECT_LT(correct_frame_pair(curr, prev, kTen).data()[0], 0.0);
}

TEST(FramePair, AffineEquivariance) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Frame prev = random_frame(rng, 6, 4, timing_at(0, rng.uniform(2, 20), rng.uniform(0, 0.03)));
    const Frame curr = random_frame(rng, 6, 4, timing_at(1, rng.uniform(2, 20), rng.uniform(0, 0.03)));
    const double alpha = rng.uniform(0.0, 10.0);
    auto scaled = [&](const Frame& f) {
      std::vector<double> d(f.data().begin(), f.data().end());
      for (double& v : d) v *= alpha;
      return Frame(f.width(), f.height(), d, f.timing());
    };
    const Frame a = correct_frame_pair(curr, prev, kTen);
    const Frame b = correct_frame_pair(scaled(curr), scaled(prev), kTen);
    for (std::size_t p = 0; p < a.size(); ++p)
      EXPECT_NEAR(b.data()[p], alpha * a.data()[p], 1e-12 * std::abs(alpha * a.data()[p]) + 1e-9);
  }
}

TEST(FramePair, PerPixelIndependence) {
  Rng rng(24);
  const Frame prev = random_frame(rng, 9, 7, timing_at(0, 5, 0.028));
  const Frame curr = random_frame(rng, 9, 7, timing_at(1.0 / 30, 20, 0.013));
  const Region r{2, 1, 5, 4};
  const Frame whole = correct_frame_pair(curr, prev, kTen).crop(r);
  const Frame part = correct_frame_pair(curr.crop(r), prev.crop(r), kTen);
  for (std::size_t p = 0; p < part.size(); ++p) EXPECT_EQ(part.data()[p], whole.data()[p]);
}

TEST(Sequence, SingleFrameIsPureGain) {
  const VideoSequence seq({Frame(3, 3, 63.212055882855765, timing_at(0, 10, 0.0))});
  const auto out = correct_sequence(seq, kTen);
  for (double v : out[0].data()) EXPECT_NEAR(v, 100.0, 1e-12);
}

TEST(Sequence, ZeroInZeroOut) {
  const VideoSequence seq({Frame(3, 3, 0.0, timing_at(0, 10, 0.02)), Frame(3, 3, 0.0, timing_at(1, 5, 0.02))});
  for (const auto& f : correct_sequence(seq, kTen))
    for (double v : f.data()) EXPECT_EQ(v, 0.0);
}

TEST(Sequence, ConstantIrradianceRecovered) {
  std::vector<Frame> film;
  const double exposures[] = {10, 5, 20, 10, 5};
  double t = 0;
  for (double te : exposures) {
    film.emplace_back(4, 4, 100.0, timing_at(t, te, 1.0 / 30 - te * 1e-3));
    t += 1.0 / 30;
  }
  const auto corrected = correct_sequence(simulate(film, kTen), kTen);
  for (const auto& f : corrected)
    for (double v : f.data()) EXPECT_NEAR(v, 100.0, 1e-9 * 100.0);
}

TEST(Sequence, InvertsSimulatorExactlyForEveryFrameAfterTheFirst) {
  Rng rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Frame> film;
    double t = 0;
    for (int k = 0; k < 6; ++k) {
      const double te = rng.uniform(2, 25), tr = rng.uniform(0, 0.03);
      film.push_back(random_frame(rng, 5, 4, timing_at(t, te, tr)));
      t += te * 1e-3 + tr;
    }
    const TimeConstants taus{Seconds{rng.uniform(5e-3, 20e-3)}, Seconds{rng.uniform(5e-3, 20e-3)}};
    const auto raw = simulate(film, taus);
    const auto corrected = correct_sequence(raw, taus, 3);
    for (std::size_t k = 1; k < film.size(); ++k)
      for (std::size_t p = 0; p < film[k].size(); ++p)
        EXPECT_NEAR(corrected[k].data()[p], film[k].data()[p], 1e-9 * film[k].data()[p] + 1e-9);
    // against the raw predecessor, not the corrected one
    const Frame expect = correct_frame_pair(raw[3], raw[2], taus);
    for (std::size_t p = 0; p < expect.size(); ++p) EXPECT_EQ(corrected[3].data()[p], expect.data()[p]);
  }
}

TEST(Sequence, ThreadCountDoesNotChangeResults) {
  Rng rng(26);
  std::vector<Frame> frames;
  for (int k = 0; k < 12; ++k) frames.push_back(random_frame(rng, 8, 8, timing_at(k * 0.04, 10, 0.03)));
  const VideoSequence seq(frames);
  const auto a = correct_sequence(seq, kTen, 1), b = correct_sequence(seq, kTen, 5);
  for (std::size_t k = 0; k < seq.size(); ++k)
    for (std::size_t p = 0; p < a[k].size(); ++p) EXPECT_EQ(a[k].data()[p], b[k].data()[p]);
}

TEST(Sequence, ErrorsCarryFrameIndex) {
  const VideoSequence seq({Frame(2, 2, 1.0, timing_at(0, 10, 0.02)),
                           Frame(2, 2, 1.0, FrameTiming{Seconds{1}, Seconds{1e-18}, Seconds{0}})});
  try {
    correct_sequence(seq, kTen);
    FAIL() << "expected an error";
  } catch (const IllConditionedError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 1"), std::string::npos);
  }
  EXPECT_THROW(correct_sequence(VideoSequence{}, kTen), DomainError);
}

TEST(Sequence, RejectsOverlappingOrMisorderedFrames) {
  EXPECT_THROW(VideoSequence({Frame(2, 2, 1.0, timing_at(0, 10, 0.02)), Frame(2, 2, 1.0, timing_at(0.02, 10, 0.02))}),
               DomainError);
  EXPECT_THROW(VideoSequence({Frame(2, 2, 1.0, timing_at(1, 10, 0.0)), Frame(2, 2, 1.0, timing_at(0, 10, 0.0))}),
               DomainError);
  EXPECT_THROW(VideoSequence({Frame(2, 2, 1.0, timing_at(0, 10, 0.0)), Frame(3, 2, 1.0, timing_at(1, 10, 0.0))}),
               DomainError);
}
