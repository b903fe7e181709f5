#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "tactile/core_model.hpp"
#include "tactile/record_log.hpp"
#include "tactile/rng.hpp"

using namespace tactile;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no tactile::Error thrown";
  return Errc::kInvalidArgument;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tactile_core_" + name);
}

// A log with one stream per modality and `n` samples spread across them.
RecordLog random_log(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  RecordLog log;
  for (ModalityKind k : kAllModalities) {
    log.streams.push_back(default_descriptor(k, make_stream_id(static_cast<unsigned>(k) % 4, k)));
  }
  std::vector<std::uint64_t> next_index(log.streams.size(), 0);
  std::uniform_int_distribution<std::size_t> pick(0, log.streams.size() - 1);
  std::uniform_real_distribution<float> val(-100.0f, 100.0f);
  std::uniform_int_distribution<int> byte(0, 255), pcm(-32768, 32767), side(1, 6);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = pick(rng);
    const auto& d = log.streams[s];
    ModalitySample m;
    m.stream_id = d.stream_id;
    m.t = sample_time(next_index[s]++, d.rate_hz);
    switch (d.kind) {
      case ModalityKind::kVisuotactile: {
        ImageFrame f;
        f.width = static_cast<std::uint16_t>(side(rng));
        f.height = static_cast<std::uint16_t>(side(rng));
        f.channels = 3;
        f.pixels.resize(static_cast<std::size_t>(f.width) * f.height * 3);
        for (auto& p : f.pixels) p = static_cast<std::uint8_t>(byte(rng));
        m.payload = f;
        break;
      }
      case ModalityKind::kSurfaceAudio: {
        AudioFrame a;
        a.channels = 4;
        a.samples.resize(4 * static_cast<std::size_t>(side(rng)));
        for (auto& x : a.samples) x = static_cast<std::int16_t>(pcm(rng));
        m.payload = a;
        break;
      }
      case ModalityKind::kSurfacePressure:
        m.payload = PressureReading{{val(rng), val(rng), val(rng), val(rng)}};
        break;
      case ModalityKind::kInertial:
        m.payload = InertialReading{{val(rng), val(rng), val(rng)}};
        break;
      case ModalityKind::kGas:
        m.payload = GasReading{val(rng), val(rng), val(rng), val(rng)};
        break;
      case ModalityKind::kHeat:
        m.payload = HeatReading{val(rng)};
        break;
    }
    log.samples.push_back(std::move(m));
  }
  return log;
}

}  // namespace

TEST(Descriptor, CameraAt240HzIsValid) {
  StreamDescriptor d{0, ModalityKind::kVisuotactile, 240.0, 3, 8};
  EXPECT_FALSE(check_descriptor(d).has_value());
  EXPECT_NO_THROW(validate_descriptor(d));
}

TEST(Descriptor, ZeroRateRejected) {
  StreamDescriptor d{1, ModalityKind::kSurfaceAudio, 0.0, 1, 16};
  EXPECT_EQ(check_descriptor(d), Errc::kZeroRate);
  EXPECT_EQ(code_of([&] { validate_descriptor(d); }), Errc::kZeroRate);
}

TEST(Descriptor, GasDefaultIsValid) {
  StreamDescriptor d{4, ModalityKind::kGas, 1.0, 4, 32};
  EXPECT_FALSE(check_descriptor(d).has_value());
}

TEST(Descriptor, ZeroChannelsAndUnknownKind) {
  StreamDescriptor d{2, ModalityKind::kSurfacePressure, 1000.0, 0, 32};
  EXPECT_EQ(check_descriptor(d), Errc::kZeroChannels);
  d.channels = 4;
  d.kind = static_cast<ModalityKind>(42);
  EXPECT_EQ(check_descriptor(d), Errc::kUnknownKind);
}

TEST(Descriptor, DefaultsAreValidForEveryModality) {
  for (ModalityKind k : kAllModalities) {
    EXPECT_FALSE(check_descriptor(default_descriptor(k, 0)).has_value()) << modality_name(k);
  }
}

TEST(StreamId, PacksFingerAndKind) {
  const auto id = make_stream_id(3, ModalityKind::kInertial);
  EXPECT_EQ(finger_of(id), 3u);
  EXPECT_EQ(id & 0xFF, static_cast<unsigned>(ModalityKind::kInertial));
}

TEST(ModalityNames, RoundTrip) {
  for (ModalityKind k : kAllModalities) EXPECT_EQ(parse_modality(modality_name(k)), k);
  EXPECT_FALSE(parse_modality("smell").has_value());
}

TEST(FrameDelay, KnownRates) {
  EXPECT_NEAR(frame_delay(240.0) * 1e3, 4.17, 0.01);
  EXPECT_NEAR(frame_delay(60.0) * 1e3, 16.7, 0.05);
  EXPECT_DOUBLE_EQ(frame_delay(1.0), 1.0);
  EXPECT_EQ(code_of([] { frame_delay(0.0); }), Errc::kZeroRate);
}

TEST(FrameDelay, StrictlyDecreasingInRate) {
  Rng rng(5);
  std::uniform_real_distribution<double> r(0.1, 1e5);
  for (int i = 0; i < 1000; ++i) {
    double a = r(rng), b = r(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    EXPECT_GT(frame_delay(a), frame_delay(b));
  }
}

TEST(Timestamp, SampleTimeRoundsToNanoseconds) {
  EXPECT_EQ(sample_time(0, 240.0).value, 0u);
  EXPECT_EQ(sample_time(1, 240.0).value, 4'166'667u);
  EXPECT_EQ(sample_time(240, 240.0).value, 1'000'000'000u);
  EXPECT_EQ(TimestampNs::from_seconds(1.5).value, 1'500'000'000u);
  EXPECT_DOUBLE_EQ(TimestampNs{250'000'000}.seconds(), 0.25);
}

TEST(Payload, KindAndDescriptorMatch) {
  const auto d = default_descriptor(ModalityKind::kSurfacePressure, 2);
  EXPECT_TRUE(payload_matches(d, PressureReading{}));
  EXPECT_FALSE(payload_matches(d, HeatReading{}));
  EXPECT_EQ(payload_kind(Payload{GasReading{}}), ModalityKind::kGas);
}

TEST(RecordLog, EmptyLogIsHeaderOnly) {
  RecordLog log;
  const auto bytes = encode_log(log);
  EXPECT_EQ(bytes.size(), 8u);  // magic, version, descriptor count
  const auto path = temp_file("empty.d36r");
  EXPECT_EQ(write_log(log, path), bytes.size());
  const auto back = read_log(path);
  EXPECT_TRUE(back.streams.empty());
  EXPECT_TRUE(back.samples.empty());
  std::filesystem::remove(path);
}

TEST(RecordLog, MixedModalityRoundTripThroughFile) {
  const auto log = random_log(17, 1000);
  const auto path = temp_file("mixed.d36r");
  write_log(log, path);
  const auto back = read_log(path);
  EXPECT_EQ(back, log);
  EXPECT_EQ(encode_log(back), encode_log(log));
  std::filesystem::remove(path);
}

TEST(RecordLog, RoundTripIsIdentityOnRandomLogs) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto log = random_log(seed, 50 + seed * 7);
    const auto bytes = encode_log(log);
    const auto back = decode_log(bytes);
    ASSERT_EQ(back, log) << "seed " << seed;
    ASSERT_EQ(encode_log(back), bytes) << "seed " << seed;
  }
}

TEST(RecordLog, EncodedSizeMatchesLayoutArithmetic) {
  const auto log = random_log(3, 200);
  std::size_t expected = 8 + log.streams.size() * 16;
  for (const auto& s : log.samples) expected += 14 + payload_size(s.payload);
  EXPECT_EQ(encode_log(log).size(), expected);
}

TEST(RecordLog, PayloadSizes) {
  EXPECT_EQ(payload_size(PressureReading{}), 16u);
  EXPECT_EQ(payload_size(InertialReading{}), 12u);
  EXPECT_EQ(payload_size(GasReading{}), 16u);
  EXPECT_EQ(payload_size(HeatReading{}), 4u);
  ImageFrame f{2, 3, 3, std::vector<std::uint8_t>(18)};
  EXPECT_EQ(payload_size(f), 4u + 18u);
  AudioFrame a{4, std::vector<std::int16_t>(8)};
  EXPECT_EQ(payload_size(a), 16u);
}

TEST(RecordLog, CorruptedMagicRejected) {
  auto bytes = encode_log(random_log(9, 20));
  bytes[0] = 'X';
  EXPECT_EQ(code_of([&] { decode_log(bytes); }), Errc::kBadMagic);
}

TEST(RecordLog, WrongVersionRejected) {
  auto bytes = encode_log(random_log(9, 20));
  bytes[4] = 7;
  EXPECT_EQ(code_of([&] { decode_log(bytes); }), Errc::kVersionMismatch);
}

TEST(RecordLog, TruncatedChunkRejected) {
  auto bytes = encode_log(random_log(9, 20));
  bytes.resize(bytes.size() - 3);
  EXPECT_EQ(code_of([&] { decode_log(bytes); }), Errc::kTruncatedChunk);
}

TEST(RecordLog, UndeclaredStreamRejectedOnEncode) {
  RecordLog log;
  log.samples.push_back({7, {}, HeatReading{}});
  EXPECT_THROW(encode_log(log), Error);
}

TEST(RecordLog, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { read_log("/nonexistent/dir/x.d36r"); }), Errc::kIoError);
}

TEST(WindowSampleShape, DetectsWrongSizes) {
  WindowSample w;
  w.visuotactile.resize(10 * 120 * 120 * 3);
  w.inertial.resize(30);
  w.pressure.resize(40);
  w.audio.resize(40 * 64);
  EXPECT_TRUE(w.shape_ok());
  w.audio.pop_back();
  EXPECT_FALSE(w.shape_ok());
}
