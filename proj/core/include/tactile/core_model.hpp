#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "tactile/error.hpp"

namespace tactile {

// Nanoseconds on a monotonic clock (virtual or real).
struct TimestampNs {
  std::uint64_t value = 0;

  static TimestampNs from_seconds(double s);
  double seconds() const { return static_cast<double>(value) * 1e-9; }

  auto operator<=>(const TimestampNs&) const = default;
};

enum class ModalityKind : std::uint8_t {
  kVisuotactile = 0,
  kSurfaceAudio = 1,
  kSurfacePressure = 2,
  kInertial = 3,
  kGas = 4,
  kHeat = 5,
};

inline constexpr std::array<ModalityKind, 6> kAllModalities = {
    ModalityKind::kVisuotactile, ModalityKind::kSurfaceAudio,
    ModalityKind::kSurfacePressure, ModalityKind::kInertial,
    ModalityKind::kGas, ModalityKind::kHeat};

std::string_view modality_name(ModalityKind kind);
std::optional<ModalityKind> parse_modality(std::string_view name);
bool is_known_kind(std::uint8_t raw);

struct StreamDescriptor {
  std::uint16_t stream_id = 0;
  ModalityKind kind = ModalityKind::kVisuotactile;
  double rate_hz = 0.0;
  std::uint32_t channels = 0;
  std::uint8_t sample_bits = 8;

  bool operator==(const StreamDescriptor&) const = default;
};

// Streams are keyed per (finger, modality): the high byte of the id is the
// finger index, the low byte the modality.
constexpr std::uint16_t make_stream_id(unsigned finger, ModalityKind kind) {
  return static_cast<std::uint16_t>((finger << 8) | static_cast<unsigned>(kind));
}
constexpr unsigned finger_of(std::uint16_t stream_id) { return stream_id >> 8; }

// Default rate/channel/bit-depth for each modality.
StreamDescriptor default_descriptor(ModalityKind kind, std::uint16_t stream_id);

// Returns the first violated invariant, or nullopt when the descriptor is valid.
std::optional<Errc> check_descriptor(const StreamDescriptor& desc);
// Throwing form of check_descriptor.
void validate_descriptor(const StreamDescriptor& desc);

// Sampling delay 1/rate in seconds.
double frame_delay(double rate_hz);
// Period of the i-th sample of a stream, rounded to whole nanoseconds.
TimestampNs sample_time(std::uint64_t index, double rate_hz);

struct ImageFrame {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t channels = 3;
  std::vector<std::uint8_t> pixels;  // row-major, interleaved channels

  bool operator==(const ImageFrame&) const = default;
};

struct AudioFrame {
  std::uint32_t channels = 1;
  std::vector<std::int16_t> samples;  // interleaved

  std::size_t frames() const { return channels ? samples.size() / channels : 0; }
  bool operator==(const AudioFrame&) const = default;
};

struct PressureReading {
  std::array<float, 4> channels{};
  bool operator==(const PressureReading&) const = default;
};

struct InertialReading {
  std::array<float, 3> accel_mps2{};
  bool operator==(const InertialReading&) const = default;
};

struct GasReading {
  float oxidation_resistance_ohm = 0.0f;
  float humidity_pct = 0.0f;
  float temperature_c = 0.0f;
  float pressure_hpa = 0.0f;
  bool operator==(const GasReading&) const = default;
};

struct HeatReading {
  float temperature_c = 0.0f;
  bool operator==(const HeatReading&) const = default;
};

using Payload = std::variant<ImageFrame, AudioFrame, PressureReading,
                             InertialReading, GasReading, HeatReading>;

ModalityKind payload_kind(const Payload& payload);
bool payload_matches(const StreamDescriptor& desc, const Payload& payload);

struct ModalitySample {
  std::uint16_t stream_id = 0;
  TimestampNs t;
  Payload payload;

  bool operator==(const ModalitySample&) const = default;
};

enum class Action : std::uint8_t { kSlide = 0, kTap = 1, kStir = 2 };
enum class Material : std::uint8_t { kWood = 0, kPlastic = 1, kSilicone = 2 };
inline constexpr std::size_t kActionCount = 3;
inline constexpr std::size_t kMaterialCount = 3;

std::string_view action_name(Action a);
std::string_view material_name(Material m);

// One 1.33 s multimodal training sample for a single finger.
struct WindowSample {
  static constexpr std::uint64_t kDurationNs = 1'330'000'000;
  static constexpr std::size_t kFrames = 10;
  static constexpr std::size_t kImageSide = 120;
  static constexpr std::size_t kImageChannels = 3;
  static constexpr std::size_t kInertialAxes = 3;
  static constexpr std::size_t kPressureChannels = 4;
  static constexpr std::size_t kAudioChannels = 4;
  static constexpr std::size_t kAudioRows = kFrames * kAudioChannels;
  static constexpr std::size_t kMelBands = 64;

  static constexpr std::array<std::size_t, 4> kVisuotactileShape = {
      kFrames, kImageSide, kImageSide, kImageChannels};
  static constexpr std::array<std::size_t, 2> kInertialShape = {kFrames, kInertialAxes};
  static constexpr std::array<std::size_t, 2> kPressureShape = {kFrames, kPressureChannels};
  static constexpr std::array<std::size_t, 3> kAudioShape = {kAudioRows, kMelBands, 1};

  TimestampNs start;
  std::uint8_t finger_id = 0;
  std::vector<std::uint8_t> visuotactile;  // kVisuotactileShape, row-major
  std::vector<float> inertial;             // kInertialShape
  std::vector<float> pressure;             // kPressureShape
  std::vector<float> audio;                // kAudioShape, row = frame * 4 + channel
  std::optional<Action> action;
  std::optional<Material> material;

  bool shape_ok() const;
};

}  // namespace tactile
