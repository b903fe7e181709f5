#include <gtest/gtest.h>

#include "tactile/synth.hpp"
#include "tactile/windowing.hpp"

using namespace tactile;

namespace {

synth::ScenarioScript window_script(double duration_s) {
  synth::ScenarioScript s;
  s.seed = 4;
  s.duration_s = duration_s;
  s.fingers = 1;
  s.visuotactile_rate_hz = 30.0;
  synth::ScenarioEvent slide;
  slide.kind = synth::EventKind::kSlide;
  slide.t_start_s = 0.0;
  slide.t_end_s = duration_s;
  slide.object = synth::ObjectSpec::solid(synth::ObjectMaterial::kWood);
  s.events = {slide};
  return s;
}

const RecordLog& long_log() {
  static const RecordLog log = synth::run_scenario(window_script(13.3));
  return log;
}

}  // namespace

TEST(Windowing, ThirteenSecondsGiveTenWindows) {
  const auto& log = long_log();
  const auto windows = dsp::build_windows(log, 1.33);
  ASSERT_EQ(windows.size(), 10u);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    EXPECT_TRUE(windows[i].shape_ok());
    EXPECT_EQ(windows[i].visuotactile.size(), 10u * 120 * 120 * 3);
    EXPECT_EQ(windows[i].pressure.size(), 10u * 4);
    EXPECT_EQ(windows[i].inertial.size(), 10u * 3);
    EXPECT_EQ(windows[i].audio.size(), 40u * 64);
    EXPECT_EQ(windows[i].start.value, i * WindowSample::kDurationNs);
  }
  dsp::WindowOptions opt;
  EXPECT_EQ(dsp::window_count(13'300'000'000ull, opt), 10u);
  EXPECT_EQ(dsp::window_count(13'299'999'999ull, opt), 9u);
}

TEST(Windowing, LabelsFollowTheScript) {
  const auto s = window_script(13.3);
  const auto windows = dsp::build_windows(long_log(), 1.33, synth::make_labeler(s));
  ASSERT_FALSE(windows.empty());
  for (const auto& w : windows) {
    ASSERT_TRUE(w.action.has_value());
    EXPECT_EQ(*w.action, Action::kSlide);
    EXPECT_EQ(*w.material, Material::kWood);
  }
}

TEST(Windowing, GasAndHeatAreNotRequired) {
  auto s = window_script(2.7);
  s.modalities = {ModalityKind::kVisuotactile, ModalityKind::kSurfaceAudio,
                  ModalityKind::kSurfacePressure, ModalityKind::kInertial};
  const auto windows = dsp::build_windows(synth::run_scenario(s), 1.33);
  EXPECT_EQ(windows.size(), 2u);
}

TEST(Windowing, MissingModalityRejected) {
  auto s = window_script(2.7);
  s.modalities = {ModalityKind::kVisuotactile, ModalityKind::kSurfaceAudio, ModalityKind::kInertial};
  const auto log = synth::run_scenario(s);
  try {
    dsp::build_windows(log, 1.33);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMissingModality);
  }
  s.modalities = {ModalityKind::kGas};
  try {
    dsp::build_windows(synth::run_scenario(s), 1.33);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMissingModality);
  }
}

TEST(Windowing, EveryFingerGetsItsWindows) {
  for (unsigned fingers : {1u, 2u, 3u}) {
    auto s = window_script(2.7);
    s.fingers = fingers;
    s.events[0].fingers.clear();
    for (unsigned f = 0; f < fingers; ++f) s.events[0].fingers.push_back(f);
    const auto windows = dsp::build_windows(synth::run_scenario(s), 1.33);
    ASSERT_EQ(windows.size(), 2u * fingers);
    for (std::size_t i = 0; i < windows.size(); ++i) {
      EXPECT_EQ(windows[i].finger_id, i % fingers);
      EXPECT_TRUE(windows[i].shape_ok());
    }
  }
}
