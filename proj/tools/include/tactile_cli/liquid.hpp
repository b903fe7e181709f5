#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tactile/record_log.hpp"
#include "tactile/synth.hpp"

namespace tactile::cli {

enum class FillLevel { kEmpty, kHalf, kFull };

inline constexpr std::array<FillLevel, 3> kFillLevels = {FillLevel::kEmpty, FillLevel::kHalf,
                                                         FillLevel::kFull};

std::string_view fill_level_name(FillLevel level);
double fill_fraction(FillLevel level);

struct LiquidOptions {
  synth::RingdownParams ringdown;
  double threshold_factor = 8.0;  // onset threshold over the envelope noise floor
  double rearm_s = 0.02;          // envelope must stay below threshold this long
  double segment_s = 0.3;         // analysis window after each onset
  double max_rise_s = 0.01;       // a tap peaks this soon after its onset
  double min_tau_s = 0.005;       // shorter decays are clicks, not ring-downs
  std::optional<unsigned> finger;  // default: first finger with audio
};

struct TapFeatures {
  unsigned finger = 0;
  double onset_s = 0.0;
  double peak_hz = 0.0;
  double tau_s = 0.0;
  double bin_hz = 0.0;  // frequency resolution of the peak estimate
  FillLevel level = FillLevel::kEmpty;
};

struct LiquidAnalysis {
  std::vector<TapFeatures> taps;
  std::array<double, 3> centroid_hz{};
  FillLevel predicted = FillLevel::kEmpty;
  std::array<std::size_t, 3> votes{};
};

// Channel 0 of one audio stream, normalized to [-1, 1].
std::vector<double> audio_track(const RecordLog& log, std::uint16_t stream_id, double* rate_hz);

// Sample indices where the audio envelope rises through the tap threshold.
std::vector<std::size_t> detect_taps(std::span<const double> audio, double rate_hz,
                                     const LiquidOptions& options = {});

// Nearest ring-down frequency centroid.
FillLevel classify_fill(double peak_hz, const synth::RingdownParams& ringdown);

// Throws NoTapsFound when the log holds no audio or no tap episode.
LiquidAnalysis analyze_liquid(const RecordLog& log, const LiquidOptions& options = {});

}  // namespace tactile::cli
