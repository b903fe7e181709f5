#include "tactile/core_model.hpp"

#include <cmath>

namespace tactile {

TimestampNs TimestampNs::from_seconds(double s) {
  if (!(s >= 0.0)) return TimestampNs{0};
  return TimestampNs{static_cast<std::uint64_t>(std::llround(s * 1e9))};
}

std::string_view modality_name(ModalityKind kind) {
  switch (kind) {
    case ModalityKind::kVisuotactile: return "visuotactile";
    case ModalityKind::kSurfaceAudio: return "audio";
    case ModalityKind::kSurfacePressure: return "pressure";
    case ModalityKind::kInertial: return "inertial";
    case ModalityKind::kGas: return "gas";
    case ModalityKind::kHeat: return "heat";
  }
  return "unknown";
}

std::optional<ModalityKind> parse_modality(std::string_view name) {
  for (ModalityKind k : kAllModalities) {
    if (modality_name(k) == name) return k;
  }
  return std::nullopt;
}

bool is_known_kind(std::uint8_t raw) {
  return raw <= static_cast<std::uint8_t>(ModalityKind::kHeat);
}

StreamDescriptor default_descriptor(ModalityKind kind, std::uint16_t stream_id) {
  StreamDescriptor d;
  d.stream_id = stream_id;
  d.kind = kind;
  switch (kind) {
    case ModalityKind::kVisuotactile:
      d.rate_hz = 240.0; d.channels = 3; d.sample_bits = 8; break;
    case ModalityKind::kSurfaceAudio:
      // 48 kHz container, content band below 10 kHz.
      d.rate_hz = 48000.0; d.channels = 4; d.sample_bits = 16; break;
    case ModalityKind::kSurfacePressure:
      d.rate_hz = 1000.0; d.channels = 4; d.sample_bits = 32; break;
    case ModalityKind::kInertial:
      d.rate_hz = 200.0; d.channels = 3; d.sample_bits = 32; break;
    case ModalityKind::kGas:
      d.rate_hz = 1.0; d.channels = 4; d.sample_bits = 32; break;
    case ModalityKind::kHeat:
      d.rate_hz = 1.0; d.channels = 1; d.sample_bits = 32; break;
  }
  return d;
}

std::optional<Errc> check_descriptor(const StreamDescriptor& desc) {
  if (!is_known_kind(static_cast<std::uint8_t>(desc.kind))) return Errc::kUnknownKind;
  if (!(desc.rate_hz > 0.0) || !std::isfinite(desc.rate_hz)) return Errc::kZeroRate;
  if (desc.channels == 0) return Errc::kZeroChannels;
  if (desc.sample_bits != 8 && desc.sample_bits != 16 && desc.sample_bits != 32)
    return Errc::kInvalidArgument;
  return std::nullopt;
}

void validate_descriptor(const StreamDescriptor& desc) {
  if (auto err = check_descriptor(desc)) {
    throw Error(*err, "stream " + std::to_string(desc.stream_id));
  }
}

double frame_delay(double rate_hz) {
  if (!(rate_hz > 0.0)) throw Error(Errc::kZeroRate, "frame_delay needs rate > 0");
  return 1.0 / rate_hz;
}

TimestampNs sample_time(std::uint64_t index, double rate_hz) {
  const long double t = static_cast<long double>(index) * 1e9L / rate_hz;
  return TimestampNs{static_cast<std::uint64_t>(std::llround(t))};
}

ModalityKind payload_kind(const Payload& payload) {
  return std::visit(
      [](const auto& p) -> ModalityKind {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ImageFrame>) return ModalityKind::kVisuotactile;
        else if constexpr (std::is_same_v<T, AudioFrame>) return ModalityKind::kSurfaceAudio;
        else if constexpr (std::is_same_v<T, PressureReading>) return ModalityKind::kSurfacePressure;
        else if constexpr (std::is_same_v<T, InertialReading>) return ModalityKind::kInertial;
        else if constexpr (std::is_same_v<T, GasReading>) return ModalityKind::kGas;
        else return ModalityKind::kHeat;
      },
      payload);
}

bool payload_matches(const StreamDescriptor& desc, const Payload& payload) {
  if (payload_kind(payload) != desc.kind) return false;
  switch (desc.kind) {
    case ModalityKind::kVisuotactile: {
      const auto& img = std::get<ImageFrame>(payload);
      return img.channels == desc.channels &&
             img.pixels.size() ==
                 static_cast<std::size_t>(img.width) * img.height * img.channels;
    }
    case ModalityKind::kSurfaceAudio: {
      const auto& a = std::get<AudioFrame>(payload);
      return a.channels == desc.channels && a.samples.size() % a.channels == 0;
    }
    case ModalityKind::kSurfacePressure: return desc.channels == 4;
    case ModalityKind::kInertial: return desc.channels == 3;
    case ModalityKind::kGas: return desc.channels == 4;
    case ModalityKind::kHeat: return desc.channels == 1;
  }
  return false;
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::kSlide: return "slide";
    case Action::kTap: return "tap";
    case Action::kStir: return "stir";
  }
  return "unknown";
}

std::string_view material_name(Material m) {
  switch (m) {
    case Material::kWood: return "wood";
    case Material::kPlastic: return "plastic";
    case Material::kSilicone: return "silicone";
  }
  return "unknown";
}

bool WindowSample::shape_ok() const {
  auto product = [](const auto& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  };
  return visuotactile.size() == product(kVisuotactileShape) &&
         inertial.size() == product(kInertialShape) &&
         pressure.size() == product(kPressureShape) &&
         audio.size() == product(kAudioShape) && finger_id < 4;
}

}  // namespace tactile
