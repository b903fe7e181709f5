#include "tactile/reflex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tactile/error.hpp"
#include "tactile/rng.hpp"

namespace tactile::reflex {

ContactDetector::ContactDetector(DetectorConfig config) : config_(config) {
  if (!(config_.rate_hz > 0.0)) throw Error(Errc::kZeroRate, "detector rate must be positive");
  if (config_.threshold < 0.0) throw Error(Errc::kInvalidArgument, "threshold must be > 0");
  threshold_ = config_.threshold;
  if (config_.refractory_fraction < 0.0 || !(config_.refractory_s > 0.0))
    throw Error(Errc::kInvalidArgument, "refractory settings must be non-negative with a positive decay");
  if (config_.source == DetectorSource::kPressure) chain_.emplace(config_.rate_hz);
}

double ContactDetector::effective_threshold(std::uint64_t t_ns) const {
  if (!episode_peak_t_ns_ || t_ns < *episode_peak_t_ns_) return threshold_;
  const double dt = static_cast<double>(t_ns - *episode_peak_t_ns_) * 1e-9;
  return std::max(threshold_, config_.refractory_fraction * episode_peak_ * std::exp(-dt / config_.refractory_s));
}

double ContactDetector::signal(const ModalitySample& sample) {
  if (config_.source == DetectorSource::kPressure) {
    const auto* p = std::get_if<PressureReading>(&sample.payload);
    if (!p) throw Error(Errc::kModalityMismatch, "pressure detector fed a non-pressure sample");
    double x = 0.0;
    for (float c : p->channels) x += c;
    x /= static_cast<double>(p->channels.size());
    if (!x0_) x0_ = x;  // start the high-pass in steady state
    return chain_->process(x - *x0_);
  }
  const auto* f = std::get_if<ImageFrame>(&sample.payload);
  if (!f) throw Error(Errc::kModalityMismatch, "visuotactile detector fed a non-image sample");
  if (reference_.empty()) throw Error(Errc::kInvalidArgument, "visuotactile detector needs calibration");
  if (f->pixels.size() != reference_.size()) throw Error(Errc::kShapeMismatch, "frame size differs from reference");
  double acc = 0.0;
  for (std::size_t i = 0; i < reference_.size(); ++i) acc += std::abs(f->pixels[i] - reference_[i]);
  return acc / static_cast<double>(reference_.size()) - baseline_mean_;
}

void ContactDetector::calibrate(std::span<const ModalitySample> baseline) {
  if (baseline.size() < 10) throw Error(Errc::kInsufficientData, "calibration needs >= 10 samples");
  if (config_.source == DetectorSource::kVisuotactile) {
    const auto* first = std::get_if<ImageFrame>(&baseline.front().payload);
    if (!first) throw Error(Errc::kModalityMismatch, "visuotactile detector fed a non-image sample");
    reference_.assign(first->pixels.size(), 0.0);
    for (const auto& s : baseline) {
      const auto* f = std::get_if<ImageFrame>(&s.payload);
      if (!f) throw Error(Errc::kModalityMismatch, "visuotactile detector fed a non-image sample");
      if (f->pixels.size() != reference_.size()) throw Error(Errc::kShapeMismatch, "frame sizes differ");
      for (std::size_t i = 0; i < reference_.size(); ++i) reference_[i] += f->pixels[i];
    }
    for (double& v : reference_) v /= static_cast<double>(baseline.size());
    baseline_mean_ = 0.0;
  }
  std::vector<double> values;
  values.reserve(baseline.size());
  for (const auto& s : baseline) values.push_back(signal(s));
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sigma = std::sqrt(var / static_cast<double>(values.size()));
  if (!(sigma > 0.0)) throw Error(Errc::kZeroNoise, "flat calibration baseline");
  if (config_.source == DetectorSource::kVisuotactile) baseline_mean_ = mean;
  if (config_.threshold == 0.0) threshold_ = config_.threshold_sigmas * sigma;
  prev_signal_ = values.back() - (config_.source == DetectorSource::kVisuotactile ? mean : 0.0);
  prev_t_ns_ = baseline.back().t.value;
}

std::optional<ContactEvent> ContactDetector::detect(const ModalitySample& sample) {
  if (!(threshold_ > 0.0)) throw Error(Errc::kInvalidArgument, "detector has no threshold");
  const double s = signal(sample);
  const std::uint64_t t = sample.t.value;
  std::optional<ContactEvent> event;

  const double trigger = effective_threshold(t);
  if (armed_ && s >= trigger) {
    TimestampNs t_event{t};
    if (prev_t_ns_ && prev_signal_ < trigger && t > *prev_t_ns_) {
      const double frac = (trigger - prev_signal_) / (s - prev_signal_);
      t_event.value = *prev_t_ns_ + static_cast<std::uint64_t>(std::llround(frac * static_cast<double>(t - *prev_t_ns_)));
    }
    event = ContactEvent{t_event, sample.t, s};
    armed_ = false;
    quiet_since_ns_.reset();
    episode_peak_ = s;
    episode_peak_t_ns_ = t;
  } else if (!armed_) {
    if (s > episode_peak_) {
      episode_peak_ = s;
      episode_peak_t_ns_ = t;
    }
    if (s < config_.release_fraction * threshold_) {
      if (!quiet_since_ns_) quiet_since_ns_ = t;
      if (static_cast<double>(t - *quiet_since_ns_) >= config_.debounce_ms * 1e6) armed_ = true;
    } else {
      quiet_since_ns_.reset();
    }
  }
  prev_signal_ = s;
  prev_t_ns_ = t;
  return event;
}

std::optional<ContactEvent> detect_contact(ContactDetector& detector, const ModalitySample& sample) {
  return detector.detect(sample);
}

void ReflexArc::on_contact(TimestampNs t_event) {
  if (!std::holds_alternative<Idle>(state_)) throw Error(Errc::kInvalidArgument, "contact while not idle");
  state_ = ContactDetected{t_event};
}

ActionCommand ReflexArc::issue(TimestampNs t_action, ActionKind kind) {
  const auto* c = std::get_if<ContactDetected>(&state_);
  if (!c) throw Error(Errc::kInvalidArgument, "action without a detected contact");
  if (t_action < c->t_event) throw Error(Errc::kInvalidArgument, "action precedes its event");
  ActionCommand cmd{kind, t_action, c->t_event};
  state_ = ActionIssued{t_action};
  return cmd;
}

void ReflexArc::complete() {
  if (!std::holds_alternative<ActionIssued>(state_)) throw Error(Errc::kInvalidArgument, "no action to complete");
  state_ = Idle{};
}

std::string_view reflex_path_name(ReflexPath path) {
  switch (path) {
    case ReflexPath::kOnDevice: return "device";
    case ReflexPath::kHostDigit360: return "host";
    case ReflexPath::kHostLegacy: return "legacy";
  }
  return "?";
}

ReflexPath parse_reflex_path(std::string_view name) {
  if (name == "device" || name == "on-device") return ReflexPath::kOnDevice;
  if (name == "host") return ReflexPath::kHostDigit360;
  if (name == "legacy") return ReflexPath::kHostLegacy;
  throw Error(Errc::kConfigError, "unknown path '" + std::string(name) + "'");
}

link::PathProfile reflex_path_profile(ReflexPath path) {
  switch (path) {
    case ReflexPath::kOnDevice: return link::PathProfile::on_device();
    case ReflexPath::kHostDigit360: return link::PathProfile::host();
    case ReflexPath::kHostLegacy: return link::PathProfile::legacy_host();
  }
  return link::PathProfile::host();
}

namespace {

constexpr double kTapPulseS = 0.010;
constexpr double kImprintRecoveryS = 0.08;
constexpr double kTrialTailS = 0.15;
constexpr std::array<double, 4> kChannelGain = {1.0, 0.9, 0.8, 0.7};
constexpr int kFrameSide = 16;

struct Touch {
  double onset_s;
  double amplitude;
  int cx, cy;
};

// Contact strength at time t: half-sine press for pressure, press then slow
// recovery of the gel imprint for the camera.
double pressure_profile(const Touch& k, double t) {
  const double u = t - k.onset_s;
  if (u < 0.0 || u > kTapPulseS) return 0.0;
  return 3.0 * k.amplitude * std::sin(std::numbers::pi * u / kTapPulseS);
}

double imprint_profile(const Touch& k, double t) {
  const double u = t - k.onset_s;
  if (u < 0.0) return 0.0;
  if (u < kTapPulseS / 2.0) return k.amplitude * std::sin(std::numbers::pi * u / kTapPulseS);
  return k.amplitude * std::exp(-(u - kTapPulseS / 2.0) / kImprintRecoveryS);
}

ModalitySample pressure_sample(std::size_t i, double rate, const Touch& k, double noise, Rng& rng) {
  std::normal_distribution<double> n(0.0, noise);
  const double t = static_cast<double>(i) / rate;
  const double x = 1.0 + pressure_profile(k, t);
  PressureReading r;
  for (std::size_t c = 0; c < 4; ++c) r.channels[c] = static_cast<float>(kChannelGain[c] * x + n(rng));
  return {make_stream_id(0, ModalityKind::kSurfacePressure), sample_time(i, rate), r};
}

ModalitySample visuo_sample(std::size_t i, double rate, const Touch& k, double noise, Rng& rng) {
  std::normal_distribution<double> n(0.0, noise);
  const double t = static_cast<double>(i) / rate;
  const double depth = 40.0 * imprint_profile(k, t);
  ImageFrame f;
  f.width = f.height = kFrameSide;
  f.channels = 3;
  f.pixels.resize(kFrameSide * kFrameSide * 3);
  for (int y = 0; y < kFrameSide; ++y) {
    for (int x = 0; x < kFrameSide; ++x) {
      const double r2 = (x - k.cx) * (x - k.cx) + (y - k.cy) * (y - k.cy);
      const double level = 100.0 + 1.5 * x - depth * std::exp(-r2 / 8.0);
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(level + n(rng), 0.0, 255.0);
        f.pixels[static_cast<std::size_t>((y * kFrameSide + x) * 3 + c)] = static_cast<std::uint8_t>(v + 0.5);
      }
    }
  }
  return {make_stream_id(0, ModalityKind::kVisuotactile), sample_time(i, rate), std::move(f)};
}

}  // namespace

ReflexBenchmark reflex_benchmark(ReflexPath path, std::size_t n_trials, std::uint64_t seed,
                                 const ReflexConfig& config) {
  if (n_trials < 100) throw Error(Errc::kInvalidArgument, "reflex benchmark needs >= 100 trials");
  link::PathProfile profile = reflex_path_profile(path);
  if (!config.jitter) profile = profile.without_jitter();
  const bool visual = path == ReflexPath::kHostLegacy;
  const double rate = profile.acquisition_rate_hz;
  const std::size_t n_cal = static_cast<std::size_t>(std::llround(config.calibration_s * rate));

  ReflexBenchmark out;
  out.path = path;
  std::vector<double> latencies;
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    // Touches depend on (seed, trial) only; stage draws on the path as well.
    Rng touch_rng = make_rng(seed, trial);
    Rng stage_rng = make_rng(derive_seed(seed, 0x57A6E + static_cast<std::uint64_t>(path)), trial);
    std::uniform_real_distribution<double> phase(0.0, 3.0 / rate), unit(0.0, 1.0);
    std::uniform_int_distribution<int> site(4, kFrameSide - 5);
    Touch k{config.calibration_s + 0.05 + phase(touch_rng), std::exp2(2.0 * unit(touch_rng) - 1.0),
            site(touch_rng), site(touch_rng)};
    const double noise = visual ? config.visuo_noise_counts : config.pressure_noise;
    auto make = [&](std::size_t i) {
      return visual ? visuo_sample(i, rate, k, noise, touch_rng) : pressure_sample(i, rate, k, noise, touch_rng);
    };

    DetectorConfig dc;
    dc.source = visual ? DetectorSource::kVisuotactile : DetectorSource::kPressure;
    dc.rate_hz = rate;
    ContactDetector detector(dc);
    std::vector<ModalitySample> cal;
    for (std::size_t i = 0; i < n_cal; ++i) cal.push_back(make(i));
    detector.calibrate(cal);

    ReflexTrial tr;
    tr.onset = TimestampNs::from_seconds(k.onset_s);
    ReflexArc arc;
    const auto n_total = static_cast<std::size_t>(std::ceil((k.onset_s + kTrialTailS + 0.2) * rate));
    for (std::size_t i = n_cal; i < n_total; ++i) {
      const auto ev = detector.detect(make(i));
      if (!ev) continue;
      ++tr.events;
      if (tr.command) continue;  // a second detection would be a duplicate episode
      arc.on_contact(ev->t_event);
      link::Workload w;
      w.inference_us = config.inference_us;
      link::StageTimings st = link::draw_stages(profile, w, stage_rng);
      st.acquisition_us = static_cast<double>(ev->t_sample.value - ev->t_event.value) * 1e-3;
      st.action_us = 0.0;  // latency ends when the command reaches the manipulator
      st.total_us = st.stage_sum();
      tr.stages = st;
      tr.latency_us = st.total_us;
      const TimestampNs t_action{ev->t_event.value + static_cast<std::uint64_t>(std::llround(st.total_us * 1e3))};
      tr.command = arc.issue(t_action);
      arc.complete();
    }
    if (tr.command) {
      ++out.commands;
      latencies.push_back(tr.latency_us);
    }
    out.trials.push_back(std::move(tr));
  }
  if (latencies.empty()) throw Error(Errc::kInsufficientData, "no contact was detected in any trial");
  out.latency = summarize(latencies);
  return out;
}

}  // namespace tactile::reflex
