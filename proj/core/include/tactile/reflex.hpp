#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "tactile/core_model.hpp"
#include "tactile/dsp.hpp"
#include "tactile/link.hpp"

namespace tactile::reflex {

enum class DetectorSource { kPressure, kVisuotactile };

struct DetectorConfig {
  DetectorSource source = DetectorSource::kPressure;
  double rate_hz = 1000.0;        // sample rate of the watched stream
  double threshold = 0.0;         // 0: set by calibrate()
  double threshold_sigmas = 5.0;  // calibrated threshold, in baseline sigmas
  double release_fraction = 0.5;  // signal must fall below this x threshold to re-arm
  double debounce_ms = 5.0;       // ... and stay there this long
  // After an episode the effective threshold is at least this fraction of the
  // episode peak, decaying with refractory_s: the high-pass rebound of a strong
  // tap scales with the tap and would otherwise open a second episode.
  double refractory_fraction = 0.1;
  double refractory_s = 0.5;
};

struct ContactEvent {
  TimestampNs t_event;   // threshold crossing, interpolated between samples
  TimestampNs t_sample;  // sample that confirmed the crossing
  double level = 0.0;
};

// Online contact detector. Pressure samples are averaged over channels and run
// through the pressure filter chain; visuotactile frames are scored by their
// mean absolute deviation from the calibration reference frame.
class ContactDetector {
 public:
  explicit ContactDetector(DetectorConfig config);

  // Feeds a quiet stretch: sets the reference (visuotactile), and the
  // threshold when none was configured. Throws InsufficientData for fewer
  // than 10 samples, ZeroNoise for a perfectly flat baseline.
  void calibrate(std::span<const ModalitySample> baseline);

  // Throws ModalityMismatch for a payload of the wrong kind, InvalidArgument
  // before a threshold exists.
  std::optional<ContactEvent> detect(const ModalitySample& sample);

  double threshold() const { return threshold_; }
  // Threshold in force at time t, including the refractory term.
  double effective_threshold(std::uint64_t t_ns) const;
  double last_signal() const { return prev_signal_; }
  const DetectorConfig& config() const { return config_; }

 private:
  double signal(const ModalitySample& sample);

  DetectorConfig config_;
  double threshold_ = 0.0;
  std::optional<dsp::PressureChain> chain_;
  std::optional<double> x0_;
  double episode_peak_ = 0.0;
  std::optional<std::uint64_t> episode_peak_t_ns_;
  std::vector<double> reference_;
  double baseline_mean_ = 0.0;
  bool armed_ = true;
  std::optional<std::uint64_t> quiet_since_ns_;
  double prev_signal_ = 0.0;
  std::optional<std::uint64_t> prev_t_ns_;
};

std::optional<ContactEvent> detect_contact(ContactDetector& detector, const ModalitySample& sample);

struct Idle {};
struct ContactDetected {
  TimestampNs t_event;
};
struct ActionIssued {
  TimestampNs t_action;
};
using ReflexState = std::variant<Idle, ContactDetected, ActionIssued>;

enum class ActionKind { kRetract, kHold };

struct ActionCommand {
  ActionKind kind = ActionKind::kRetract;
  TimestampNs issue_t;
  TimestampNs event_t;
};

// Idle -> ContactDetected -> ActionIssued -> Idle. Out-of-order calls throw
// InvalidArgument and leave the state unchanged.
class ReflexArc {
 public:
  const ReflexState& state() const { return state_; }
  void on_contact(TimestampNs t_event);
  ActionCommand issue(TimestampNs t_action, ActionKind kind = ActionKind::kRetract);
  void complete();

 private:
  ReflexState state_ = Idle{};
};

enum class ReflexPath { kOnDevice, kHostDigit360, kHostLegacy };

std::string_view reflex_path_name(ReflexPath path);
// "device", "host", "legacy"; throws ConfigError otherwise.
ReflexPath parse_reflex_path(std::string_view name);
link::PathProfile reflex_path_profile(ReflexPath path);

struct ReflexConfig {
  double calibration_s = 0.5;
  double pressure_noise = 0.01;
  double visuo_noise_counts = 2.0;
  double inference_us = 0.0;  // decision cost beyond the threshold detector
  bool jitter = true;
};

struct ReflexTrial {
  double latency_us = 0.0;  // event to action command at the manipulator
  link::StageTimings stages;
  TimestampNs onset;
  std::optional<ActionCommand> command;
  std::size_t events = 0;  // detections during the trial
};

struct ReflexBenchmark {
  ReflexPath path = ReflexPath::kOnDevice;
  std::vector<ReflexTrial> trials;
  SummaryStats latency;
  std::size_t commands = 0;
};

// One tap per trial, detected on the path's sensing modality and routed
// through its stages. Contact waveforms depend only on (seed, trial), so two
// paths run with one seed see identical touches. Throws InvalidArgument for
// fewer than 100 trials.
ReflexBenchmark reflex_benchmark(ReflexPath path, std::size_t n_trials, std::uint64_t seed,
                                 const ReflexConfig& config = {});

}  // namespace tactile::reflex
