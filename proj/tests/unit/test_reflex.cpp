#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tactile/error.hpp"
#include "tactile/reflex.hpp"
#include "tactile/rng.hpp"

using namespace tactile;
using namespace tactile::reflex;

namespace {

constexpr double kRate = 1000.0;

ModalitySample pressure_at(std::size_t i, double value) {
  const auto v = static_cast<float>(value);
  return {make_stream_id(0, ModalityKind::kSurfacePressure), sample_time(i, kRate), PressureReading{{v, v, v, v}}};
}

// Baseline offset plus noise plus 10 ms half-sine taps centred on `taps`.
std::vector<ModalitySample> pressure_stream(std::size_t n, std::span<const double> taps, std::uint64_t seed,
                                            double noise = 0.01, double amplitude = 3.0) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, noise);
  std::vector<ModalitySample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kRate;
    double v = 0.4 + z(rng);
    for (double tk : taps) {
      const double u = t - tk;
      if (std::abs(u) < 0.005) v += amplitude * std::cos(std::numbers::pi * u / 0.01);
    }
    out.push_back(pressure_at(i, v));
  }
  return out;
}

std::vector<ContactEvent> run_detector(const std::vector<ModalitySample>& s, std::size_t n_cal,
                                       DetectorConfig cfg = {}) {
  ContactDetector d(cfg);
  d.calibrate(std::span(s).first(n_cal));
  std::vector<ContactEvent> events;
  for (std::size_t i = n_cal; i < s.size(); ++i)
    if (auto ev = d.detect(s[i])) events.push_back(*ev);
  return events;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kInvalidArgument;
}

}  // namespace

TEST(ReflexArc, FollowsTheCycle) {
  ReflexArc arc;
  EXPECT_TRUE(std::holds_alternative<Idle>(arc.state()));
  arc.on_contact(TimestampNs{100});
  EXPECT_TRUE(std::holds_alternative<ContactDetected>(arc.state()));
  const auto cmd = arc.issue(TimestampNs{250}, ActionKind::kHold);
  EXPECT_EQ(cmd.event_t.value, 100u);
  EXPECT_EQ(cmd.issue_t.value, 250u);
  EXPECT_EQ(cmd.kind, ActionKind::kHold);
  EXPECT_TRUE(std::holds_alternative<ActionIssued>(arc.state()));
  arc.complete();
  EXPECT_TRUE(std::holds_alternative<Idle>(arc.state()));
}

TEST(ReflexArc, InvalidTransitionsLeaveStateUnchanged) {
  ReflexArc arc;
  EXPECT_EQ(code_of([&] { arc.issue(TimestampNs{5}); }), Errc::kInvalidArgument);
  EXPECT_EQ(code_of([&] { arc.complete(); }), Errc::kInvalidArgument);
  EXPECT_TRUE(std::holds_alternative<Idle>(arc.state()));
  arc.on_contact(TimestampNs{100});
  EXPECT_EQ(code_of([&] { arc.on_contact(TimestampNs{120}); }), Errc::kInvalidArgument);
  EXPECT_EQ(code_of([&] { arc.issue(TimestampNs{50}); }), Errc::kInvalidArgument);
  ASSERT_TRUE(std::holds_alternative<ContactDetected>(arc.state()));
  EXPECT_EQ(std::get<ContactDetected>(arc.state()).t_event.value, 100u);
}

TEST(ReflexArc, RandomCallSequencesNeverActWithoutContact) {
  Rng rng(44);
  std::uniform_int_distribution<int> op(0, 2);
  std::uniform_int_distribution<std::uint64_t> dt(0, 1000);
  for (int seq = 0; seq < 2000; ++seq) {
    ReflexArc arc;
    std::uint64_t now = 0;
    bool contact_pending = false;
    for (int step = 0; step < 30; ++step) {
      now += dt(rng);
      const bool was_contact = std::holds_alternative<ContactDetected>(arc.state());
      try {
        switch (op(rng)) {
          case 0: arc.on_contact(TimestampNs{now}); contact_pending = true; break;
          case 1: arc.issue(TimestampNs{now}); break;
          default: arc.complete(); break;
        }
      } catch (const Error&) {
      }
      if (std::holds_alternative<ActionIssued>(arc.state()) && !was_contact) {
        ASSERT_TRUE(std::holds_alternative<ActionIssued>(arc.state()));
      }
      if (std::holds_alternative<ActionIssued>(arc.state())) {
        ASSERT_TRUE(contact_pending);
      }
      if (std::holds_alternative<Idle>(arc.state())) contact_pending = false;
    }
  }
}

TEST(Detector, QuietStreamRaisesNothing) {
  const auto s = pressure_stream(5000, {}, 3);
  EXPECT_TRUE(run_detector(s, 500).empty());
}

TEST(Detector, TapDetectedPromptly) {
  const double taps[] = {1.0};
  const auto s = pressure_stream(2000, taps, 5);
  const auto ev = run_detector(s, 500);
  ASSERT_EQ(ev.size(), 1u);
  const DetectorConfig cfg;
  const double onset_s = 1.0 - 0.005;
  const double t_sample = ev[0].t_sample.seconds();
  EXPECT_GE(t_sample, onset_s);
  EXPECT_LE(t_sample - onset_s, cfg.debounce_ms * 1e-3 + 1.0 / kRate);
  EXPECT_LE(ev[0].t_event.value, ev[0].t_sample.value);
  EXPECT_GE(ev[0].t_event.value + 1'000'000, ev[0].t_sample.value);
}

TEST(Detector, TwoSeparatedTapsGiveTwoEvents) {
  const double taps[] = {1.0, 1.6};
  const auto ev = run_detector(pressure_stream(3000, taps, 6), 500);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_NEAR(ev[0].t_sample.seconds(), 1.0, 0.006);
  EXPECT_NEAR(ev[1].t_sample.seconds(), 1.6, 0.006);
}

TEST(Detector, CalibrationErrors) {
  ContactDetector d({});
  const auto s = pressure_stream(5, {}, 1);
  EXPECT_EQ(code_of([&] { d.calibrate(s); }), Errc::kInsufficientData);
  std::vector<ModalitySample> flat;
  for (std::size_t i = 0; i < 100; ++i) flat.push_back(pressure_at(i, 0.0));
  EXPECT_EQ(code_of([&] { d.calibrate(flat); }), Errc::kZeroNoise);
  EXPECT_EQ(code_of([&] { d.detect(flat[0]); }), Errc::kInvalidArgument);
}

TEST(Detector, WrongModalityRejected) {
  ContactDetector d({});
  d.calibrate(pressure_stream(200, {}, 2));
  const ModalitySample heat{make_stream_id(0, ModalityKind::kHeat), TimestampNs{0}, HeatReading{30.0f}};
  EXPECT_EQ(code_of([&] { d.detect(heat); }), Errc::kModalityMismatch);
}

TEST(Detector, VisuotactileFramesScoredAgainstReference) {
  DetectorConfig cfg;
  cfg.source = DetectorSource::kVisuotactile;
  cfg.rate_hz = 240.0;
  ContactDetector d(cfg);
  Rng rng(8);
  std::normal_distribution<double> z(0.0, 2.0);
  auto frame = [&](std::size_t i, bool touch) {
    ImageFrame f{16, 16, 3, std::vector<std::uint8_t>(16 * 16 * 3)};
    for (std::size_t p = 0; p < f.pixels.size(); ++p) {
      double v = 100.0 + z(rng) + (touch && p < 16 * 4 * 3 ? 60.0 : 0.0);
      f.pixels[p] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    return ModalitySample{make_stream_id(0, ModalityKind::kVisuotactile), sample_time(i, 240.0), f};
  };
  std::vector<ModalitySample> cal;
  for (std::size_t i = 0; i < 50; ++i) cal.push_back(frame(i, false));
  d.calibrate(cal);
  std::size_t events = 0;
  for (std::size_t i = 50; i < 100; ++i) events += d.detect(frame(i, false)).has_value();
  EXPECT_EQ(events, 0u);
  EXPECT_TRUE(d.detect(frame(100, true)).has_value());
  EXPECT_EQ(code_of([&] { d.detect(pressure_at(101, 1.0)); }), Errc::kModalityMismatch);
}

TEST(ReflexBenchmark, ExactlyOneCommandPerTrial) {
  const auto b = reflex_benchmark(ReflexPath::kOnDevice, 10'000, 17);
  ASSERT_EQ(b.trials.size(), 10'000u);
  EXPECT_EQ(b.commands, 10'000u);
  for (const auto& t : b.trials) {
    ASSERT_TRUE(t.command.has_value());
    ASSERT_EQ(t.events, 1u);
    ASSERT_GE(t.command->issue_t.value, t.command->event_t.value);
    ASSERT_GT(t.latency_us, 0.0);
  }
}

TEST(ReflexBenchmark, DeviceBeatsHostOnMatchedTrials) {
  const auto dev = reflex_benchmark(ReflexPath::kOnDevice, 300, 5);
  const auto host = reflex_benchmark(ReflexPath::kHostDigit360, 300, 5);
  ASSERT_EQ(dev.trials.size(), host.trials.size());
  std::size_t faster = 0, matched = 0;
  for (std::size_t i = 0; i < dev.trials.size(); ++i) {
    if (!dev.trials[i].command || !host.trials[i].command) continue;
    EXPECT_EQ(dev.trials[i].onset.value, host.trials[i].onset.value);
    ++matched;
    faster += dev.trials[i].latency_us < host.trials[i].latency_us;
  }
  EXPECT_GE(matched, 295u);
  EXPECT_GE(static_cast<double>(faster) / static_cast<double>(matched), 0.99);
  EXPECT_LT(dev.latency.mean, host.latency.mean);
}

TEST(ReflexBenchmark, RejectsTooFewTrialsAndUnknownPaths) {
  EXPECT_EQ(code_of([] { reflex_benchmark(ReflexPath::kOnDevice, 99, 1); }), Errc::kInvalidArgument);
  EXPECT_EQ(code_of([] { parse_reflex_path("teleport"); }), Errc::kConfigError);
  EXPECT_EQ(parse_reflex_path("legacy"), ReflexPath::kHostLegacy);
}
