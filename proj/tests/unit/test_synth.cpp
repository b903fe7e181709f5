#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tactile/dsp.hpp"
#include "tactile/synth.hpp"

using namespace tactile;
using namespace tactile::synth;

namespace {

ScenarioScript quiet_script(double duration_s, unsigned fingers = 1) {
  ScenarioScript s;
  s.duration_s = duration_s;
  s.fingers = fingers;
  s.seed = 21;
  return s;
}

std::size_t count_stream(const RecordLog& log, std::uint16_t id) {
  return static_cast<std::size_t>(
      std::count_if(log.samples.begin(), log.samples.end(), [&](const auto& s) { return s.stream_id == id; }));
}

// Channel-mean pressure series of one finger.
std::vector<double> pressure_series(const RecordLog& log, unsigned finger) {
  std::vector<double> out;
  const auto id = make_stream_id(finger, ModalityKind::kSurfacePressure);
  for (const auto& s : log.samples) {
    if (s.stream_id != id) continue;
    const auto& p = std::get<PressureReading>(s.payload);
    out.push_back((p.channels[0] + p.channels[1] + p.channels[2] + p.channels[3]) / 4.0);
  }
  return out;
}

std::vector<double> audio_channel0(const RecordLog& log, unsigned finger) {
  std::vector<double> out;
  const auto id = make_stream_id(finger, ModalityKind::kSurfaceAudio);
  for (const auto& s : log.samples) {
    if (s.stream_id != id) continue;
    const auto& a = std::get<AudioFrame>(s.payload);
    for (std::size_t i = 0; i < a.frames(); ++i) out.push_back(a.samples[i * a.channels]);
  }
  return out;
}

// Largest FFT-magnitude bin of the zero-padded signal, in Hz.
double fft_argmax_hz(const std::vector<double>& x, double rate, double* bin_hz) {
  const double f = dsp::peak_frequency(x, rate);
  *bin_hz = rate / static_cast<double>(dsp::next_pow2(2 * x.size()));
  return f;
}

}  // namespace

TEST(Scenario, SilentSecondHasNominalSampleCounts) {
  const auto log = run_scenario(quiet_script(1.0));
  EXPECT_EQ(count_stream(log, make_stream_id(0, ModalityKind::kVisuotactile)), 240u);
  EXPECT_EQ(count_stream(log, make_stream_id(0, ModalityKind::kSurfacePressure)), 1000u);
  EXPECT_EQ(count_stream(log, make_stream_id(0, ModalityKind::kInertial)), 200u);
  EXPECT_EQ(count_stream(log, make_stream_id(0, ModalityKind::kSurfaceAudio)), 48000u / 480u);
  EXPECT_EQ(count_stream(log, make_stream_id(0, ModalityKind::kGas)), 1u);
  EXPECT_EQ(count_stream(log, make_stream_id(0, ModalityKind::kHeat)), 1u);
  EXPECT_EQ(log.streams.size(), 6u);
}

TEST(Scenario, StreamsPerFingerAndModalitySubset) {
  auto s = quiet_script(0.5, 3);
  s.modalities = {ModalityKind::kSurfacePressure, ModalityKind::kHeat};
  const auto log = run_scenario(s);
  EXPECT_EQ(log.streams.size(), 6u);
  for (const auto& d : log.streams) EXPECT_LT(finger_of(d.stream_id), 3u);
}

TEST(Scenario, SameSeedGivesByteIdenticalLogs) {
  auto s = quiet_script(0.6, 2);
  ScenarioEvent ev;
  ev.kind = EventKind::kSlide;
  ev.t_start_s = 0.1;
  ev.t_end_s = 0.5;
  ev.fingers = {0, 1};
  ev.object = ObjectSpec::solid(ObjectMaterial::kSilicone);
  s.events = {ev};
  EXPECT_EQ(encode_log(run_scenario(s)), encode_log(run_scenario(s)));
  auto other = s;
  other.seed = 22;
  EXPECT_NE(encode_log(run_scenario(other)), encode_log(run_scenario(s)));
}

TEST(Scenario, TapTransientsCentredOnTapTime) {
  auto s = quiet_script(1.0);
  s.modalities = {ModalityKind::kSurfacePressure, ModalityKind::kSurfaceAudio};
  ScenarioEvent ev;
  ev.kind = EventKind::kTap;
  ev.t_start_s = 0.5;
  ev.t_end_s = 0.6;
  ev.object = ObjectSpec::solid(ObjectMaterial::kWood);
  s.events = {ev};
  const auto log = run_scenario(s);

  const auto p = pressure_series(log, 0);
  std::vector<double> dev(p.size());
  const double base = p.front();
  for (std::size_t i = 0; i < p.size(); ++i) dev[i] = std::abs(p[i] - base);
  const auto ip = static_cast<double>(std::max_element(dev.begin(), dev.end()) - dev.begin());
  EXPECT_NEAR(ip / 1000.0, 0.5, 0.006);

  const auto a = audio_channel0(log, 0);
  const auto env = dsp::hilbert_envelope(a);
  const auto ia = static_cast<double>(std::max_element(env.begin(), env.end()) - env.begin());
  EXPECT_NEAR(ia / 48000.0, 0.5, 0.01);
}

TEST(Scenario, OverlappingEventsRejected) {
  auto s = quiet_script(1.0);
  ScenarioEvent a, b;
  a.t_start_s = 0.1;
  a.t_end_s = 0.5;
  b.t_start_s = 0.4;
  b.t_end_s = 0.8;
  s.events = {a, b};
  try {
    validate_script(s);
    FAIL() << "expected OverlappingEvents";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kOverlappingEvents);
  }
  s.events[1].fingers = {0};
  s.fingers = 2;
  s.events[0].fingers = {1};
  EXPECT_NO_THROW(validate_script(s));
}

TEST(ScenarioFile, ParsesFields) {
  const auto s = parse_scenario(R"(
seed: 5
duration_s: 2.5
fingers: 2
modalities: [audio, pressure]
noise: {pressure: 0.02}
events:
  - kind: tap
    start: 0.5
    end: 1.0
    fingers: [1]
    position: 0.25
    object: {material: plastic, fill: 0.5}
)");
  EXPECT_EQ(s.seed, 5u);
  EXPECT_DOUBLE_EQ(s.duration_s, 2.5);
  EXPECT_EQ(s.fingers, 2u);
  ASSERT_EQ(s.modalities.size(), 2u);
  EXPECT_DOUBLE_EQ(s.noise.pressure, 0.02);
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_EQ(s.events[0].kind, EventKind::kTap);
  EXPECT_EQ(s.events[0].fingers, std::vector<unsigned>{1});
  ASSERT_TRUE(s.events[0].object.fill_fraction.has_value());
  EXPECT_DOUBLE_EQ(*s.events[0].object.fill_fraction, 0.5);
}

TEST(ScenarioFile, ErrorsCarryLineNumbers) {
  const char* bad[] = {
      "seed: 1\nevents:\n  - kind: poke\n    start: 0\n    end: 1\n",
      "seed: 1\nduration: 3\n",
      "seed: [1\n",
  };
  const char* line[] = {"line 3", "line 2", "line"};
  for (int i = 0; i < 3; ++i) {
    try {
      parse_scenario(bad[i]);
      FAIL() << "accepted: " << bad[i];
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kParseError);
      EXPECT_NE(std::string(e.what()).find(line[i]), std::string::npos) << e.what();
    }
  }
}

TEST(Labeler, LabelsTouchActionsOnly) {
  auto s = quiet_script(3.0);
  ScenarioEvent slide;
  slide.kind = EventKind::kSlide;
  slide.t_start_s = 0.0;
  slide.t_end_s = 1.0;
  slide.object = ObjectSpec::solid(ObjectMaterial::kPlastic);
  ScenarioEvent hold = slide;
  hold.kind = EventKind::kHold;
  hold.t_start_s = 1.5;
  hold.t_end_s = 2.5;
  s.events = {slide, hold};
  const auto label = make_labeler(s);
  const auto a = label(0, TimestampNs::from_seconds(0.5));
  ASSERT_TRUE(a.has_value());
  EXPECT_EQ(a->first, Action::kSlide);
  EXPECT_EQ(a->second, Material::kPlastic);
  EXPECT_FALSE(label(0, TimestampNs::from_seconds(2.0)).has_value());
  EXPECT_FALSE(label(0, TimestampNs::from_seconds(1.2)).has_value());
}

TEST(Ringdown, PeakFrequencyFallsWithFill) {
  double prev = INFINITY;
  for (double fill : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto x = gen_ringdown(ObjectSpec::container(fill), 0.5, 0.3);
    double bin = 0.0;
    const double f = fft_argmax_hz(x, 48000.0, &bin);
    EXPECT_NEAR(f, RingdownParams{}.frequency(fill), bin);
    EXPECT_LT(f, prev);
    prev = f;
  }
}

TEST(Ringdown, PositionChangesDecayButNotPitch) {
  const auto obj = ObjectSpec::container(0.5);
  double bin = 0.0;
  const auto lo = gen_ringdown(obj, 0.1, 0.3);
  const auto hi = gen_ringdown(obj, 0.9, 0.3);
  EXPECT_LE(std::abs(fft_argmax_hz(lo, 48000.0, &bin) - fft_argmax_hz(hi, 48000.0, &bin)), bin);
  const double tau_lo = dsp::decay_time(lo, 48000.0);
  const double tau_hi = dsp::decay_time(hi, 48000.0);
  EXPECT_NEAR(tau_lo, RingdownParams{}.tau(0.1), 0.05 * RingdownParams{}.tau(0.1));
  EXPECT_GT(tau_hi / tau_lo, 1.2);
}

TEST(Ringdown, ZeroAmplitudeIsSilent) {
  const auto x = gen_ringdown(ObjectSpec::container(1.0), 0.5, 0.1, 48000.0, 0.0);
  EXPECT_TRUE(std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; }));
}

TEST(Ringdown, SolidObjectRejected) {
  try {
    gen_ringdown(ObjectSpec::solid(ObjectMaterial::kWood), 0.5, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotAContainer);
  }
}

TEST(Gas, StartsAtAmbient) {
  const GasModel m;
  const auto obj = ObjectSpec::solid(ObjectMaterial::kCheese);
  const auto g0 = gas_expected(obj, 0.0, m);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(g0[c], m.ambient[c]);
}

TEST(Gas, ApproachSettlesOnSignature) {
  GasModel m;
  m.approach_jitter = 0.0;
  m.ambient_jitter = 0.0;
  for (ObjectMaterial mat : kGasMaterials) {
    const auto obj = ObjectSpec::solid(mat);
    Rng rng = make_rng(4, static_cast<std::uint64_t>(mat));
    const auto r = gen_gas_approach(obj, 90.0, rng, m);
    ASSERT_EQ(r.size(), 90u);
    const std::size_t tail = r.size() / 10;
    for (std::size_t c = 0; c < 4; ++c) {
      double mean = 0.0;
      for (std::size_t i = r.size() - tail; i < r.size(); ++i) mean += gas_vector(r[i])[c];
      mean /= static_cast<double>(tail);
      const double sigma = m.sample_noise * m.channel_scale[c];
      EXPECT_LE(std::abs(mean - obj.gas.mean[c]), 2.0 * sigma) << object_material_name(mat) << " ch " << c;
    }
  }
}

TEST(Gas, SeparatedSignaturesAreSeparableAtFullIntegration) {
  const GasModel m;
  const ObjectMaterial pair[2] = {ObjectMaterial::kCoffeePowder, ObjectMaterial::kSoap};
  std::array<std::vector<GasVector>, 2> feats;
  for (int k = 0; k < 2; ++k) {
    for (int run = 0; run < 40; ++run) {
      Rng rng = make_rng(99, static_cast<std::uint64_t>(k * 100 + run));
      const auto r = gen_gas_approach(ObjectSpec::solid(pair[k]), 90.0, rng, m);
      GasVector f{};
      for (const auto& g : r) {
        const auto v = gas_vector(g);
        for (std::size_t c = 0; c < 4; ++c) f[c] += v[c] / m.channel_scale[c] / static_cast<double>(r.size());
      }
      feats[static_cast<std::size_t>(k)].push_back(f);
    }
  }
  // Centroids from even runs, evaluated on odd runs.
  std::array<GasVector, 2> centroid{};
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < 40; i += 2)
      for (std::size_t c = 0; c < 4; ++c) centroid[k][c] += feats[k][i][c] / 20.0;
  }
  auto dist = [](const GasVector& a, const GasVector& b) {
    double d = 0.0;
    for (std::size_t c = 0; c < 4; ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
    return d;
  };
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t i = 1; i < 40; i += 2) {
      EXPECT_LT(dist(feats[k][i], centroid[k]), dist(feats[k][i], centroid[1 - k]));
    }
  }
}

TEST(Visuotactile, NoContactIsBackgroundPlusNoise) {
  VisuoConfig cfg;
  cfg.photons = 100'000;
  const auto& bg = visuo_background(cfg);
  const auto img = gen_visuotactile({}, cfg, 0.0, 3);
  ASSERT_EQ(img.data.size(), bg.data.size());
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double d = img.data[i] - bg.data[i];
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(img.data.size());
  EXPECT_NEAR(sum / n, 0.0, 0.2);
  EXPECT_NEAR(std::sqrt(sq / n), cfg.noise_sigma, 0.3);
}

TEST(Visuotactile, ContactsProduceDisjointDeviationRegions) {
  VisuoConfig cfg;
  cfg.photons = 200'000;
  const auto& bg = visuo_background(cfg);
  const int side = cfg.output_size;
  // Channel-mean deviation from the background, box-smoothed over 5x5 pixels
  // to suppress photon noise, thresholded at half its maximum.
  auto deviation_mask = [&](const std::vector<optics::Contact>& contacts, double* max_dev) {
    const auto img = gen_visuotactile(contacts, cfg, 0.0, 5);
    std::vector<double> dev(static_cast<std::size_t>(side) * side);
    for (int p = 0; p < side * side; ++p) {
      double d = 0.0;
      for (int c = 0; c < 3; ++c) {
        const auto k = static_cast<std::size_t>(p * 3 + c);
        d += img.data[k] - bg.data[k];
      }
      dev[static_cast<std::size_t>(p)] = std::abs(d / 3.0);
    }
    std::vector<double> smooth(dev.size(), 0.0);
    double peak = 0.0;
    for (int y = 2; y < side - 2; ++y) {
      for (int x = 2; x < side - 2; ++x) {
        double acc = 0.0;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) acc += dev[static_cast<std::size_t>((y + dy) * side + x + dx)];
        smooth[static_cast<std::size_t>(y * side + x)] = acc / 25.0;
        peak = std::max(peak, acc / 25.0);
      }
    }
    *max_dev = peak;
    std::vector<std::uint8_t> mask(smooth.size());
    for (std::size_t i = 0; i < smooth.size(); ++i) mask[i] = smooth[i] > 0.5 * peak;
    return mask;
  };
  const optics::Contact a{40.0, 0.0, 2.0, 0.4};
  const optics::Contact b{40.0, 180.0, 2.0, 0.4};
  double dev_a = 0.0, dev_b = 0.0, dev_ab = 0.0;
  const auto mask_a = deviation_mask({a}, &dev_a);
  const auto mask_b = deviation_mask({b}, &dev_b);
  const auto mask_ab = deviation_mask({a, b}, &dev_ab);
  EXPECT_GT(dev_a, 3.0 * cfg.noise_sigma);
  EXPECT_GT(dev_b, 3.0 * cfg.noise_sigma);
  std::size_t in_a = 0, in_b = 0, overlap = 0, hit_a = 0, hit_b = 0;
  for (std::size_t i = 0; i < mask_a.size(); ++i) {
    in_a += mask_a[i];
    in_b += mask_b[i];
    overlap += mask_a[i] && mask_b[i];
    hit_a += mask_ab[i] && mask_a[i];
    hit_b += mask_ab[i] && mask_b[i];
  }
  EXPECT_GT(in_a, 6u);
  EXPECT_GT(in_b, 6u);
  EXPECT_EQ(overlap, 0u);
  // Both imprints survive in the joint render.
  EXPECT_GT(hit_a, in_a / 4);
  EXPECT_GT(hit_b, in_b / 4);
}
