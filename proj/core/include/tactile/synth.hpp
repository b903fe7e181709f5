#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tactile/core_model.hpp"
#include "tactile/optics.hpp"
#include "tactile/record_log.hpp"
#include "tactile/rng.hpp"
#include "tactile/windowing.hpp"

namespace tactile::synth {

enum class EventKind : std::uint8_t { kTap, kSlide, kStir, kApproach, kHold };

std::string_view event_kind_name(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view name);

enum class ObjectMaterial : std::uint8_t {
  kWood,
  kPlastic,
  kSilicone,
  kCoffeePowder,
  kLiquidCoffee,
  kRubber,
  kCheese,
  kSoap,
  kButter,
  kAir,
};

std::string_view object_material_name(ObjectMaterial m);
std::optional<ObjectMaterial> parse_object_material(std::string_view name);
// The touch-classification label for wood/plastic/silicone, nullopt otherwise.
std::optional<Material> touch_material(ObjectMaterial m);

// The six odour sources of the gas experiment.
inline constexpr std::array<ObjectMaterial, 6> kGasMaterials = {
    ObjectMaterial::kCoffeePowder, ObjectMaterial::kLiquidCoffee, ObjectMaterial::kRubber,
    ObjectMaterial::kCheese,       ObjectMaterial::kSoap,         ObjectMaterial::kButter};

// Gas channel order: oxidation resistance (ohm), humidity (%), temperature (C),
// pressure (hPa).
using GasVector = std::array<double, 4>;

struct GasSignature {
  GasVector mean{};
  double noise_scale = 1.0;  // multiplies the model's per-channel noise
};

// First-order relaxation model of the fingertip gas sensor.
struct GasModel {
  GasVector ambient = {50'000.0, 45.0, 22.0, 1013.0};
  // One "unit" per channel: signatures and noise are expressed in these.
  GasVector channel_scale = {2'000.0, 1.5, 0.3, 0.5};
  double tau_s = 20.0;
  double rate_hz = 1.0;
  double sample_noise = 0.15;     // white noise per reading, in channel units
  double approach_jitter = 0.7;   // per-approach offset of the signature
  double ambient_jitter = 0.2;    // per-approach offset of the starting baseline
};

GasSignature default_gas_signature(ObjectMaterial m, const GasModel& model = {});

GasVector gas_vector(const GasReading& r);
GasReading gas_reading(const GasVector& v);

struct ObjectSpec {
  ObjectMaterial material = ObjectMaterial::kWood;
  std::optional<double> fill_fraction;  // set only for containers
  double temperature_c = 22.0;
  GasSignature gas = default_gas_signature(ObjectMaterial::kWood);

  static ObjectSpec solid(ObjectMaterial m);
  static ObjectSpec container(double fill_fraction,
                              ObjectMaterial wall = ObjectMaterial::kPlastic);
  bool is_container() const { return fill_fraction.has_value(); }
};

// Single-mode container resonance. Filling lowers the frequency; where the
// finger touches changes only the damping.
struct RingdownParams {
  double f0_hz = 900.0;
  double k_fill = 0.4;
  double tau_base_s = 0.02;
  double tau_per_position_s = 0.04;

  double frequency(double fill_fraction) const { return f0_hz * (1.0 - k_fill * fill_fraction); }
  // Position is the normalized contact height on the container, 0 = bottom.
  double tau(double position) const { return tau_base_s + tau_per_position_s * position; }
};

std::vector<double> gen_ringdown(const ObjectSpec& obj, double contact_position,
                                 double duration_s, double rate_hz = 48'000.0,
                                 double amplitude = 1.0, const RingdownParams& params = {});

// One approach starting from ambient air: readings at t = k / rate for
// k < duration * rate.
std::vector<GasReading> gen_gas_approach(const ObjectSpec& obj, double approach_duration_s,
                                         Rng& rng, const GasModel& model = {});
// Noise-free expectation of the approach curve at time t.
GasVector gas_expected(const ObjectSpec& obj, double t_s, const GasModel& model = {});

struct VisuoConfig {
  optics::ScatterSurface surface = optics::ScatterSurface::gaussian(22.5);
  std::uint64_t photons = 200'000;
  std::uint64_t render_seed = 1;
  double background_level = 110.0;  // mean 8-bit level of the lit dome
  double noise_sigma = 2.0;         // sensor read noise, 8-bit counts
  int output_size = static_cast<int>(WindowSample::kImageSide);
};

// Renders the contacts through the optics simulator and maps the result to a
// 120x120x3 image in 8-bit count units (not quantized). Sensor noise is drawn
// from a generator seeded by (seed, t).
optics::TaxelImage gen_visuotactile(std::span<const optics::Contact> contacts,
                                    const VisuoConfig& config, double t_s,
                                    std::uint64_t seed = 0);

// Rendered no-contact background at output resolution, in count units.
// Computed once per configuration and reused.
const optics::TaxelImage& visuo_background(const VisuoConfig& config);

ImageFrame to_image_frame(const optics::TaxelImage& img);

struct ScenarioEvent {
  double t_start_s = 0.0;
  double t_end_s = 0.0;
  EventKind kind = EventKind::kHold;
  ObjectSpec object;
  std::vector<unsigned> fingers = {0};
  double position = 0.5;  // contact position on the object in [0, 1]
  double force = 1.0;     // grasp force scale
};

struct NoiseConfig {
  double pressure = 0.01;
  double audio_counts = 20.0;
  double inertial = 0.03;
  double heat = 0.02;
};

struct ScenarioScript {
  std::uint64_t seed = 1;
  double duration_s = 1.0;
  unsigned fingers = 4;
  std::vector<ModalityKind> modalities{kAllModalities.begin(), kAllModalities.end()};
  double visuotactile_rate_hz = 240.0;
  double audio_rate_hz = 48'000.0;
  std::uint32_t audio_frame = 480;  // samples per audio chunk
  NoiseConfig noise;
  RingdownParams ringdown;
  GasModel gas;
  VisuoConfig visuo;
  std::vector<ScenarioEvent> events;
};

// Throws OverlappingEvents or InvalidArgument.
void validate_script(const ScenarioScript& script);

// Deterministic synthesis of every (finger, modality) stream of the script.
RecordLog run_scenario(const ScenarioScript& script);

// Event covering finger `finger` at time t, if any.
const ScenarioEvent* event_at(const ScenarioScript& script, unsigned finger, double t_s);

// Labels a window by the event at its centre, when that event is a labelled
// touch action on a labelled material.
dsp::WindowLabeler make_labeler(const ScenarioScript& script);

// Scenario text files (YAML). Throws Error(kParseError) with a line number.
ScenarioScript parse_scenario(std::string_view text);
ScenarioScript load_scenario(const std::filesystem::path& path);

}  // namespace tactile::synth
