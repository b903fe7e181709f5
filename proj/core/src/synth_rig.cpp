#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "tactile/error.hpp"
#include "tactile/synth.hpp"

namespace tactile::synth {

using std::numbers::pi;

namespace {

constexpr double kTapPeriodS = 0.4;
constexpr double kTapPulseS = 0.010;
constexpr double kTapImpulseS = 0.015;
constexpr double kImprintRecoveryS = 0.08;
constexpr double kAudioFullScale = 8000.0;
constexpr double kSkinTemperatureC = 32.0;
constexpr double kHeatTauS = 3.0;
constexpr double kGravity = 9.81;
constexpr std::array<double, 4> kAudioChannelGain = {1.0, 0.8, 0.6, 0.45};
constexpr std::array<double, 4> kPressureChannelGain = {1.0, 0.9, 0.8, 0.7};

// Touch response of the materials the hand can grasp.
struct TouchParams {
  double audio_hz;
  double ring_tau_s;
  double stiffness;
  double imprint_radius_mm;
  std::array<double, 4> finger_pattern;  // grasp force share per finger
};

TouchParams touch_params(ObjectMaterial m) {
  switch (m) {
    case ObjectMaterial::kWood: return {1500.0, 0.030, 1.0, 1.2, {1.0, 0.6, 0.6, 1.0}};
    case ObjectMaterial::kPlastic: return {3500.0, 0.020, 0.8, 1.6, {0.6, 1.0, 1.0, 0.6}};
    case ObjectMaterial::kSilicone: return {500.0, 0.010, 0.5, 2.4, {1.0, 1.0, 0.5, 0.5}};
    default: return {1000.0, 0.015, 0.6, 1.8, {0.8, 0.8, 0.8, 0.8}};
  }
}

double half_sine(double u, double width) {
  if (u <= -width / 2.0 || u >= width / 2.0) return 0.0;
  return std::sin(pi * (u + width / 2.0) / width);
}

// Raised-cosine contact envelope over [0, d].
double contact_envelope(double tau, double d) {
  if (tau < 0.0 || tau > d) return 0.0;
  const double ramp = std::min(0.05, d / 4.0);
  if (ramp <= 0.0) return 1.0;
  if (tau < ramp) return 0.5 * (1.0 - std::cos(pi * tau / ramp));
  if (tau > d - ramp) return 0.5 * (1.0 - std::cos(pi * (d - tau) / ramp));
  return 1.0;
}

std::vector<double> tap_times(const ScenarioEvent& ev) {
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double t = ev.t_start_s + k * kTapPeriodS;
    if (k > 0 && t >= ev.t_end_s) break;
    out.push_back(t);
    if (t >= ev.t_end_s) break;
  }
  return out;
}

// Randomness drawn once per event, shared by every stream it touches.
struct EventDraw {
  double gain = 1.0;
  double phase = 0.0;
  double direction = 0.0;
  std::array<double, 4> polar{};
  std::array<double, 4> azimuth{};
};

std::vector<EventDraw> draw_events(const ScenarioScript& s) {
  std::vector<EventDraw> draws;
  draws.reserve(s.events.size());
  for (std::size_t e = 0; e < s.events.size(); ++e) {
    Rng rng = make_rng(s.seed, 0x1'0000ULL + e);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    EventDraw d;
    d.gain = std::exp(std::log(0.5) + u01(rng) * std::log(4.0));
    d.phase = 2.0 * pi * u01(rng);
    d.direction = 2.0 * pi * u01(rng);
    for (std::size_t f = 0; f < 4; ++f) {
      d.polar[f] = 10.0 + 30.0 * u01(rng);
      d.azimuth[f] = 360.0 * u01(rng);
    }
    draws.push_back(d);
  }
  return draws;
}

bool touches(const ScenarioEvent& ev, unsigned finger) {
  return std::find(ev.fingers.begin(), ev.fingers.end(), finger) != ev.fingers.end();
}

double force_amplitude(const ScenarioEvent& ev, const EventDraw& d, unsigned finger) {
  const TouchParams tp = touch_params(ev.object.material);
  return ev.force * d.gain * tp.stiffness * tp.finger_pattern[finger % 4];
}

std::size_t sample_count(double duration_s, double rate_hz) {
  return static_cast<std::size_t>(std::floor(duration_s * rate_hz + 1e-9));
}

// Index range of samples at `rate` whose times fall in [t0, t1], clipped to n.
std::pair<std::size_t, std::size_t> index_range(double t0, double t1, double rate, std::size_t n) {
  const double lo = std::max(0.0, std::ceil(t0 * rate - 1e-9));
  const double hi = std::floor(t1 * rate + 1e-9) + 1.0;
  const auto a = static_cast<std::size_t>(std::min(lo, static_cast<double>(n)));
  const auto b = static_cast<std::size_t>(std::clamp(hi, lo, static_cast<double>(n)));
  return {a, b};
}

struct Context {
  const ScenarioScript& script;
  std::vector<EventDraw> draws;
};

std::vector<ModalitySample> gen_pressure(const Context& cx, unsigned finger) {
  const ScenarioScript& s = cx.script;
  const auto id = make_stream_id(finger, ModalityKind::kSurfacePressure);
  const double rate = default_descriptor(ModalityKind::kSurfacePressure, id).rate_hz;
  const std::size_t n = sample_count(s.duration_s, rate);
  std::vector<double> extra(n, 0.0);

  for (std::size_t e = 0; e < s.events.size(); ++e) {
    const auto& ev = s.events[e];
    if (!touches(ev, finger) || ev.kind == EventKind::kApproach) continue;
    const double a = force_amplitude(ev, cx.draws[e], finger);
    const double phase = cx.draws[e].phase;
    const double d = ev.t_end_s - ev.t_start_s;
    if (ev.kind == EventKind::kTap) {
      for (double tk : tap_times(ev)) {
        auto [i0, i1] = index_range(tk - kTapPulseS, tk + kTapPulseS, rate, n);
        for (std::size_t i = i0; i < i1; ++i) {
          extra[i] += 3.0 * a * half_sine(static_cast<double>(i) / rate - tk, kTapPulseS);
        }
      }
      continue;
    }
    const double freq = ev.kind == EventKind::kSlide ? 1.0 : 2.5;
    auto [i0, i1] = index_range(ev.t_start_s, ev.t_end_s, rate, n);
    for (std::size_t i = i0; i < i1; ++i) {
      const double tau = static_cast<double>(i) / rate - ev.t_start_s;
      const double c = contact_envelope(tau, d);
      double v = 2.0 * a * c;
      if (ev.kind != EventKind::kHold) v += 0.6 * a * c * std::sin(2.0 * pi * freq * tau + phase);
      extra[i] += v;
    }
  }

  Rng rng = make_rng(s.seed, id);
  std::normal_distribution<double> noise(0.0, s.noise.pressure);
  std::vector<ModalitySample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PressureReading r;
    for (std::size_t c = 0; c < 4; ++c) {
      const double base = 1.0 + 0.1 * static_cast<double>(c);
      r.channels[c] = static_cast<float>(base + kPressureChannelGain[c] * extra[i] + noise(rng));
    }
    out.push_back({id, sample_time(i, rate), r});
  }
  return out;
}

// RBJ band-pass with unit peak gain.
struct Resonator {
  double b0, b2, a1, a2;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  Resonator(double f0, double q, double fs) {
    const double w0 = 2.0 * pi * f0 / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0 = alpha / a0;
    b2 = -alpha / a0;
    a1 = -2.0 * std::cos(w0) / a0;
    a2 = (1.0 - alpha) / a0;
  }
  double process(double x) {
    const double y = b0 * x + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

// Gaussian sensor noise read from a pre-drawn pool at a random offset per
// frame. Drawing fresh normals for every pixel and audio sample dominated
// synthesis time.
class NoisePool {
 public:
  NoisePool(Rng& rng, double sigma) : values_(kSize) {
    std::normal_distribution<double> d(0.0, sigma);
    for (double& v : values_) v = d(rng);
  }
  // Start of the next frame's noise run.
  std::size_t next(Rng& rng) { return pick_(rng); }
  double at(std::size_t offset, std::size_t k) const { return values_[(offset + k) & (kSize - 1)]; }

 private:
  static constexpr std::size_t kSize = std::size_t{1} << 17;
  std::vector<double> values_;
  std::uniform_int_distribution<std::size_t> pick_{0, kSize - 1};
};

template <typename T, long Lo, long Hi>
T round_clamped(double v) {
  if (v <= static_cast<double>(Lo)) return static_cast<T>(Lo);
  if (v >= static_cast<double>(Hi)) return static_cast<T>(Hi);
  return static_cast<T>(std::floor(v + 0.5));
}

std::vector<ModalitySample> gen_audio(const Context& cx, unsigned finger) {
  const ScenarioScript& s = cx.script;
  const auto id = make_stream_id(finger, ModalityKind::kSurfaceAudio);
  const double rate = s.audio_rate_hz;
  const std::size_t n = sample_count(s.duration_s, rate);
  std::vector<double> mono(n, 0.0);

  for (std::size_t e = 0; e < s.events.size(); ++e) {
    const auto& ev = s.events[e];
    if (!touches(ev, finger)) continue;
    const TouchParams tp = touch_params(ev.object.material);
    const double a = force_amplitude(ev, cx.draws[e], finger);
    if (ev.kind == EventKind::kTap) {
      double freq = tp.audio_hz, tau = tp.ring_tau_s, amp = 0.4 * a;
      if (ev.object.is_container()) {
        freq = s.ringdown.frequency(*ev.object.fill_fraction);
        tau = s.ringdown.tau(ev.position);
        amp = 0.5 * ev.force;
      }
      for (double tk : tap_times(ev)) {
        auto [i0, i1] = index_range(tk, tk + 8.0 * tau, rate, n);
        for (std::size_t i = i0; i < i1; ++i) {
          const double u = static_cast<double>(i) / rate - tk;
          mono[i] += amp * std::exp(-u / tau) * std::sin(2.0 * pi * freq * u);
        }
      }
    } else if (ev.kind == EventKind::kSlide || ev.kind == EventKind::kStir) {
      Rng tex = make_rng(derive_seed(s.seed, id), e);
      std::normal_distribution<double> white(0.0, 1.0);
      const double q = 3.0;
      const double f0 = std::min(tp.audio_hz, 0.45 * rate);
      Resonator res(f0, q, rate);
      const double norm = std::sqrt(q * rate / (pi * f0));
      const double d = ev.t_end_s - ev.t_start_s;
      const double phase = cx.draws[e].phase;
      auto [i0, i1] = index_range(ev.t_start_s, ev.t_end_s, rate, n);
      for (std::size_t i = i0; i < i1; ++i) {
        const double tau = static_cast<double>(i) / rate - ev.t_start_s;
        const double mod = ev.kind == EventKind::kSlide
                               ? 0.7 + 0.3 * std::sin(2.0 * pi * 1.0 * tau + phase)
                               : 0.5 + 0.5 * std::sin(2.0 * pi * 2.5 * tau + phase);
        mono[i] += 0.15 * a * contact_envelope(tau, d) * mod * norm * res.process(white(tex));
      }
    }
  }

  Rng rng = make_rng(s.seed, id);
  NoisePool noise(rng, s.noise.audio_counts);
  const std::uint32_t frame = std::max<std::uint32_t>(1, s.audio_frame);
  std::vector<ModalitySample> out;
  for (std::size_t start = 0; start < n; start += frame) {
    const std::size_t len = std::min<std::size_t>(frame, n - start);
    const std::size_t o = noise.next(rng);
    AudioFrame af;
    af.channels = 4;
    af.samples.resize(len * 4);
    for (std::size_t i = 0; i < len; ++i) {
      for (std::size_t c = 0; c < 4; ++c) {
        const double v = kAudioFullScale * kAudioChannelGain[c] * mono[start + i] + noise.at(o, i * 4 + c);
        af.samples[i * 4 + c] = round_clamped<std::int16_t, -32768, 32767>(v);
      }
    }
    out.push_back({id, sample_time(start, rate), std::move(af)});
  }
  return out;
}


std::vector<ModalitySample> gen_inertial(const Context& cx, unsigned finger) {
  const ScenarioScript& s = cx.script;
  const auto id = make_stream_id(finger, ModalityKind::kInertial);
  const double rate = default_descriptor(ModalityKind::kInertial, id).rate_hz;
  const std::size_t n = sample_count(s.duration_s, rate);
  std::vector<std::array<double, 3>> acc(n, {0.0, 0.0, kGravity});

  for (std::size_t e = 0; e < s.events.size(); ++e) {
    const auto& ev = s.events[e];
    if (!touches(ev, finger)) continue;
    const EventDraw& d = cx.draws[e];
    if (ev.kind == EventKind::kTap) {
      for (double tk : tap_times(ev)) {
        auto [i0, i1] = index_range(tk - kTapImpulseS, tk + kTapImpulseS, rate, n);
        for (std::size_t i = i0; i < i1; ++i) {
          acc[i][2] -= 4.0 * half_sine(static_cast<double>(i) / rate - tk, kTapImpulseS);
        }
      }
      continue;
    }
    if (ev.kind != EventKind::kSlide && ev.kind != EventKind::kStir) continue;
    const double dur = ev.t_end_s - ev.t_start_s;
    auto [i0, i1] = index_range(ev.t_start_s, ev.t_end_s, rate, n);
    for (std::size_t i = i0; i < i1; ++i) {
      const double tau = static_cast<double>(i) / rate - ev.t_start_s;
      const double c = contact_envelope(tau, dur);
      if (ev.kind == EventKind::kSlide) {
        const double v = 2.0 * c * std::sin(2.0 * pi * 0.75 * tau + d.phase);
        acc[i][0] += v * std::cos(d.direction);
        acc[i][1] += v * std::sin(d.direction);
      } else {
        acc[i][0] += 2.5 * c * std::cos(2.0 * pi * 2.5 * tau + d.phase);
        acc[i][1] += 2.5 * c * std::sin(2.0 * pi * 2.5 * tau + d.phase);
      }
    }
  }

  Rng rng = make_rng(s.seed, id);
  std::normal_distribution<double> noise(0.0, s.noise.inertial);
  std::vector<ModalitySample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    InertialReading r;
    for (std::size_t k = 0; k < 3; ++k) r.accel_mps2[k] = static_cast<float>(acc[i][k] + noise(rng));
    out.push_back({id, sample_time(i, rate), r});
  }
  return out;
}

// Contact imprint drawn directly in image space: a dark pressed centre with a
// bright rim where the gel bulges.
void add_imprint(optics::TaxelImage& img, double cx, double cy, double radius_px, double amp) {
  const double r_core = 0.6 * radius_px;
  const double r_rim = 0.3 * radius_px;
  const int span = static_cast<int>(std::ceil(2.0 * radius_px)) + 1;
  const int x0 = std::max(0, static_cast<int>(cx) - span);
  const int x1 = std::min(img.width - 1, static_cast<int>(cx) + span);
  const int y0 = std::max(0, static_cast<int>(cy) - span);
  const int y1 = std::min(img.height - 1, static_cast<int>(cy) + span);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double rho = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      const double core = std::exp(-rho * rho / (2.0 * r_core * r_core));
      const double rim = std::exp(-(rho - radius_px) * (rho - radius_px) / (2.0 * r_rim * r_rim));
      const double delta = amp * (-40.0 * core + 22.0 * rim);
      for (int c = 0; c < img.channels; ++c) img.at(x, y, c) += delta;
    }
  }
}

struct ImprintSite {
  double x, y, radius_px;
};

ImprintSite imprint_site(const optics::DomeGeometry& g, int size, double polar_deg,
                         double azimuth_deg, double radius_mm) {
  const auto c = optics::dome_to_pixel(g, size, optics::dome_point(g, polar_deg, azimuth_deg));
  const double dpolar = radius_mm / g.radius_mm * 180.0 / pi;
  const auto edge =
      optics::dome_to_pixel(g, size, optics::dome_point(g, polar_deg + dpolar, azimuth_deg));
  const double rx = (*edge)[0] - (*c)[0], ry = (*edge)[1] - (*c)[1];
  return {(*c)[0], (*c)[1], std::max(1.0, std::hypot(rx, ry))};
}

std::vector<ModalitySample> gen_visuo_stream(const Context& cx, unsigned finger) {
  const ScenarioScript& s = cx.script;
  const auto id = make_stream_id(finger, ModalityKind::kVisuotactile);
  const double rate = s.visuotactile_rate_hz;
  const std::size_t n = sample_count(s.duration_s, rate);
  const optics::TaxelImage& background = visuo_background(s.visuo);
  const int size = background.width;
  optics::DomeGeometry geom;

  struct Active {
    const ScenarioEvent* ev;
    const EventDraw* draw;
    ImprintSite site;
    double amp;
    std::vector<double> taps;
  };
  std::vector<Active> active;
  for (std::size_t e = 0; e < s.events.size(); ++e) {
    const auto& ev = s.events[e];
    if (!touches(ev, finger) || ev.kind == EventKind::kApproach) continue;
    const EventDraw& d = cx.draws[e];
    const TouchParams tp = touch_params(ev.object.material);
    const std::size_t f = finger % 4;
    Active a{&ev, &d, imprint_site(geom, size, d.polar[f], d.azimuth[f], tp.imprint_radius_mm),
             std::min(force_amplitude(ev, d, finger), 2.0), {}};
    if (ev.kind == EventKind::kTap) a.taps = tap_times(ev);
    active.push_back(std::move(a));
  }

  Rng rng = make_rng(s.seed, id);
  NoisePool noise(rng, s.visuo.noise_sigma);
  std::vector<ModalitySample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    optics::TaxelImage img = background;
    for (const auto& a : active) {
      const ScenarioEvent& ev = *a.ev;
      const double tau = t - ev.t_start_s;
      double amp = 0.0, dx = 0.0, dy = 0.0;
      if (ev.kind == EventKind::kTap) {
        for (double tk : a.taps) {
          if (t >= tk - kTapPulseS / 2.0) amp += std::exp(-std::max(0.0, t - tk) / kImprintRecoveryS);
        }
        amp *= a.amp;
      } else {
        amp = a.amp * contact_envelope(tau, ev.t_end_s - ev.t_start_s);
        if (ev.kind == EventKind::kSlide) {
          const double disp = 8.0 * std::sin(2.0 * pi * 0.75 * tau + a.draw->phase);
          dx = disp * std::cos(a.draw->direction);
          dy = disp * std::sin(a.draw->direction);
        } else if (ev.kind == EventKind::kStir) {
          dx = 6.0 * std::cos(2.0 * pi * 2.5 * tau + a.draw->phase);
          dy = 6.0 * std::sin(2.0 * pi * 2.5 * tau + a.draw->phase);
        }
      }
      if (amp > 1e-4) add_imprint(img, a.site.x + dx, a.site.y + dy, a.site.radius_px, amp);
    }
    const std::size_t o = noise.next(rng);
    for (std::size_t k = 0; k < img.data.size(); ++k) img.data[k] += noise.at(o, k);
    out.push_back({id, sample_time(i, rate), to_image_frame(img)});
  }
  return out;
}

std::vector<ModalitySample> gen_heat(const Context& cx, unsigned finger) {
  const ScenarioScript& s = cx.script;
  const auto id = make_stream_id(finger, ModalityKind::kHeat);
  const double rate = default_descriptor(ModalityKind::kHeat, id).rate_hz;
  const std::size_t n = sample_count(s.duration_s, rate);
  Rng rng = make_rng(s.seed, id);
  std::normal_distribution<double> noise(0.0, s.noise.heat);
  std::vector<ModalitySample> out;
  double temp = kSkinTemperatureC;
  const double decay = std::exp(-1.0 / (rate * kHeatTauS));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const ScenarioEvent* ev = event_at(s, finger, t);
    const double target = ev && ev->kind != EventKind::kApproach ? ev->object.temperature_c
                                                                  : kSkinTemperatureC;
    if (i > 0) temp = target + (temp - target) * decay;
    out.push_back({id, sample_time(i, rate), HeatReading{static_cast<float>(temp + noise(rng))}});
  }
  return out;
}

std::vector<ModalitySample> gen_gas_stream(const Context& cx, unsigned finger) {
  const ScenarioScript& s = cx.script;
  const GasModel& m = s.gas;
  const auto id = make_stream_id(finger, ModalityKind::kGas);
  const double rate = m.rate_hz;
  const std::size_t n = sample_count(s.duration_s, rate);
  Rng rng = make_rng(s.seed, id);
  std::normal_distribution<double> unit(0.0, 1.0);

  // Per-approach signature offsets, drawn in event order.
  std::vector<GasVector> target(s.events.size());
  for (std::size_t e = 0; e < s.events.size(); ++e) {
    const auto& ev = s.events[e];
    for (std::size_t c = 0; c < 4; ++c) {
      target[e][c] = ev.object.gas.mean[c] + m.approach_jitter * m.channel_scale[c] * unit(rng);
    }
  }

  GasVector g = m.ambient;
  const double decay = std::exp(-1.0 / (rate * m.tau_s));
  std::vector<ModalitySample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    GasVector goal = m.ambient;
    double noise_scale = 1.0;
    for (std::size_t e = 0; e < s.events.size(); ++e) {
      const auto& ev = s.events[e];
      if (ev.kind == EventKind::kApproach && touches(ev, finger) && t >= ev.t_start_s &&
          t < ev.t_end_s) {
        goal = target[e];
        noise_scale = ev.object.gas.noise_scale;
      }
    }
    GasVector v;
    for (std::size_t c = 0; c < 4; ++c) {
      if (i > 0) g[c] = goal[c] + (g[c] - goal[c]) * decay;
      v[c] = g[c] + m.sample_noise * noise_scale * m.channel_scale[c] * unit(rng);
    }
    out.push_back({id, sample_time(i, rate), gas_reading(v)});
  }
  return out;
}

void resample_bilinear(const optics::TaxelImage& src, optics::TaxelImage& dst) {
  const double sx = static_cast<double>(src.width) / dst.width;
  const double sy = static_cast<double>(src.height) / dst.height;
  for (int y = 0; y < dst.height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < dst.width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < dst.channels; ++c) {
        const double top = (1 - wx) * src.at(x0, y0, c) + wx * src.at(x1, y0, c);
        const double bot = (1 - wx) * src.at(x0, y1, c) + wx * src.at(x1, y1, c);
        dst.at(x, y, c) = (1 - wy) * top + wy * bot;
      }
    }
  }
}

struct BackgroundEntry {
  optics::TaxelImage image;
  double scale = 1.0;  // render units -> counts
};

using BackgroundKey = std::tuple<int, double, std::uint64_t, std::uint64_t, double, int>;

BackgroundKey background_key(const VisuoConfig& c) {
  return {static_cast<int>(c.surface.mode), c.surface.alpha_hwhm_deg, c.photons, c.render_seed,
          c.background_level, c.output_size};
}

optics::RenderConfig visuo_render_config(const VisuoConfig& c) {
  optics::RenderConfig rc;
  rc.photons = c.photons;
  rc.seed = c.render_seed;
  return rc;
}

const BackgroundEntry& background_entry(const VisuoConfig& config) {
  static std::mutex mu;
  static std::map<BackgroundKey, BackgroundEntry> cache;
  std::lock_guard lock(mu);
  const auto key = background_key(config);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const optics::RenderConfig rc = visuo_render_config(config);
  const optics::TaxelImage raw =
      optics::render(config.surface, optics::LedRing::uniform(), {}, rc);
  const optics::Mask mask = optics::dome_mask(rc.geometry, raw.width, 90.0);
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      if (!mask[static_cast<std::size_t>(y) * raw.width + x]) continue;
      sum += raw.intensity(x, y);
      ++count;
    }
  }
  BackgroundEntry entry;
  entry.scale = count && sum > 0.0 ? config.background_level * count / sum : 0.0;
  optics::TaxelImage scaled = raw;
  for (double& v : scaled.data) v *= entry.scale;
  entry.image = optics::TaxelImage::zeros(config.output_size, config.output_size, 3, 1);
  resample_bilinear(scaled, entry.image);
  return cache.emplace(key, std::move(entry)).first->second;
}

}  // namespace

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::kTap: return "tap";
    case EventKind::kSlide: return "slide";
    case EventKind::kStir: return "stir";
    case EventKind::kApproach: return "approach";
    case EventKind::kHold: return "hold";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (auto k : {EventKind::kTap, EventKind::kSlide, EventKind::kStir, EventKind::kApproach,
                 EventKind::kHold}) {
    if (event_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

namespace {
constexpr std::array<std::pair<ObjectMaterial, std::string_view>, 10> kMaterialNames = {{
    {ObjectMaterial::kWood, "wood"},
    {ObjectMaterial::kPlastic, "plastic"},
    {ObjectMaterial::kSilicone, "silicone"},
    {ObjectMaterial::kCoffeePowder, "coffee-powder"},
    {ObjectMaterial::kLiquidCoffee, "liquid-coffee"},
    {ObjectMaterial::kRubber, "rubber"},
    {ObjectMaterial::kCheese, "cheese"},
    {ObjectMaterial::kSoap, "soap"},
    {ObjectMaterial::kButter, "butter"},
    {ObjectMaterial::kAir, "air"},
}};
}  // namespace

std::string_view object_material_name(ObjectMaterial m) {
  for (const auto& [k, name] : kMaterialNames) {
    if (k == m) return name;
  }
  return "?";
}

std::optional<ObjectMaterial> parse_object_material(std::string_view name) {
  for (const auto& [k, n] : kMaterialNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::optional<Material> touch_material(ObjectMaterial m) {
  switch (m) {
    case ObjectMaterial::kWood: return Material::kWood;
    case ObjectMaterial::kPlastic: return Material::kPlastic;
    case ObjectMaterial::kSilicone: return Material::kSilicone;
    default: return std::nullopt;
  }
}

GasSignature default_gas_signature(ObjectMaterial m, const GasModel& model) {
  // Offsets from ambient air in channel units.
  GasVector offset{};
  switch (m) {
    case ObjectMaterial::kCoffeePowder: offset = {-4.0, -1.0, 0.0, 0.0}; break;
    case ObjectMaterial::kLiquidCoffee: offset = {-3.0, 2.5, 1.5, 0.0}; break;
    case ObjectMaterial::kRubber: offset = {2.0, -1.5, 0.0, 1.5}; break;
    case ObjectMaterial::kCheese: offset = {-1.0, 1.5, -1.5, -1.5}; break;
    case ObjectMaterial::kSoap: offset = {3.0, 2.0, 0.5, -1.0}; break;
    case ObjectMaterial::kButter: offset = {0.0, -2.5, -1.5, 1.5}; break;
    case ObjectMaterial::kWood: offset = {1.0, -0.5, 0.0, 0.0}; break;
    case ObjectMaterial::kPlastic: offset = {0.5, 0.0, 0.0, 0.5}; break;
    case ObjectMaterial::kSilicone: offset = {0.0, 0.5, 0.0, -0.5}; break;
    case ObjectMaterial::kAir: break;
  }
  GasSignature sig;
  for (std::size_t c = 0; c < 4; ++c) sig.mean[c] = model.ambient[c] + offset[c] * model.channel_scale[c];
  return sig;
}

GasVector gas_vector(const GasReading& r) {
  return {r.oxidation_resistance_ohm, r.humidity_pct, r.temperature_c, r.pressure_hpa};
}

GasReading gas_reading(const GasVector& v) {
  return {static_cast<float>(v[0]), static_cast<float>(v[1]), static_cast<float>(v[2]),
          static_cast<float>(v[3])};
}

ObjectSpec ObjectSpec::solid(ObjectMaterial m) {
  ObjectSpec o;
  o.material = m;
  o.gas = default_gas_signature(m);
  return o;
}

ObjectSpec ObjectSpec::container(double fill_fraction, ObjectMaterial wall) {
  if (!(fill_fraction >= 0.0 && fill_fraction <= 1.0))
    throw Error(Errc::kInvalidArgument, "fill fraction must lie in [0, 1]");
  ObjectSpec o = solid(wall);
  o.fill_fraction = fill_fraction;
  return o;
}

std::vector<double> gen_ringdown(const ObjectSpec& obj, double contact_position, double duration_s,
                                 double rate_hz, double amplitude, const RingdownParams& params) {
  if (!obj.is_container()) throw Error(Errc::kNotAContainer, "ring-down needs a container");
  if (!(params.f0_hz > 0.0) || !(rate_hz > 0.0) || !(duration_s >= 0.0))
    throw Error(Errc::kInvalidArgument, "ring-down parameters must be positive");
  const double f = params.frequency(*obj.fill_fraction);
  const double tau = params.tau(contact_position);
  if (!(tau > 0.0)) throw Error(Errc::kInvalidArgument, "decay constant must be positive");
  const std::size_t n = sample_count(duration_s, rate_hz);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    out[i] = amplitude * std::exp(-t / tau) * std::sin(2.0 * pi * f * t);
  }
  return out;
}

GasVector gas_expected(const ObjectSpec& obj, double t_s, const GasModel& model) {
  GasVector g;
  const double k = std::exp(-t_s / model.tau_s);
  for (std::size_t c = 0; c < 4; ++c) {
    g[c] = obj.gas.mean[c] + (model.ambient[c] - obj.gas.mean[c]) * k;
  }
  return g;
}

std::vector<GasReading> gen_gas_approach(const ObjectSpec& obj, double approach_duration_s,
                                         Rng& rng, const GasModel& model) {
  if (!(approach_duration_s > 0.0))
    throw Error(Errc::kInvalidArgument, "approach duration must be positive");
  std::normal_distribution<double> unit(0.0, 1.0);
  GasVector amb, sig;
  for (std::size_t c = 0; c < 4; ++c) {
    amb[c] = model.ambient[c] + model.ambient_jitter * model.channel_scale[c] * unit(rng);
    sig[c] = obj.gas.mean[c] + model.approach_jitter * model.channel_scale[c] * unit(rng);
  }
  const std::size_t n = std::max<std::size_t>(1, sample_count(approach_duration_s, model.rate_hz));
  std::vector<GasReading> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = std::exp(-static_cast<double>(i) / model.rate_hz / model.tau_s);
    GasVector v;
    for (std::size_t c = 0; c < 4; ++c) {
      v[c] = sig[c] + (amb[c] - sig[c]) * k +
             model.sample_noise * obj.gas.noise_scale * model.channel_scale[c] * unit(rng);
    }
    out.push_back(gas_reading(v));
  }
  return out;
}

const optics::TaxelImage& visuo_background(const VisuoConfig& config) {
  return background_entry(config).image;
}

optics::TaxelImage gen_visuotactile(std::span<const optics::Contact> contacts,
                                    const VisuoConfig& config, double t_s, std::uint64_t seed) {
  const BackgroundEntry& bg = background_entry(config);
  optics::TaxelImage img;
  if (contacts.empty()) {
    img = bg.image;
  } else {
    const optics::RenderConfig rc = visuo_render_config(config);
    optics::TaxelImage raw = optics::render(config.surface, optics::LedRing::uniform(), contacts, rc);
    for (double& v : raw.data) v *= bg.scale;
    img = optics::TaxelImage::zeros(config.output_size, config.output_size, 3, 1);
    resample_bilinear(raw, img);
  }
  Rng rng = make_rng(seed, static_cast<std::uint64_t>(std::llround(t_s * 1e9)));
  std::normal_distribution<double> noise(0.0, config.noise_sigma);
  for (double& v : img.data) v = std::max(0.0, v + noise(rng));
  return img;
}

ImageFrame to_image_frame(const optics::TaxelImage& img) {
  ImageFrame f;
  f.width = static_cast<std::uint16_t>(img.width);
  f.height = static_cast<std::uint16_t>(img.height);
  f.channels = static_cast<std::uint8_t>(img.channels);
  f.pixels.resize(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    f.pixels[i] = round_clamped<std::uint8_t, 0, 255>(img.data[i]);
  }
  return f;
}

void validate_script(const ScenarioScript& s) {
  if (!(s.duration_s > 0.0)) throw Error(Errc::kInvalidArgument, "duration must be positive");
  if (s.fingers == 0 || s.fingers > 4) throw Error(Errc::kInvalidArgument, "fingers must be 1..4");
  if (!(s.visuotactile_rate_hz > 0.0) || !(s.audio_rate_hz > 0.0))
    throw Error(Errc::kZeroRate, "stream rates must be positive");
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& ev = s.events[i];
    if (!(ev.t_start_s >= 0.0) || !(ev.t_end_s > ev.t_start_s) || ev.t_end_s > s.duration_s + 1e-9)
      throw Error(Errc::kInvalidArgument,
                  "event " + std::to_string(i) + " must satisfy 0 <= start < end <= duration");
    if (ev.fingers.empty()) throw Error(Errc::kInvalidArgument, "event without fingers");
    for (unsigned f : ev.fingers) {
      if (f >= s.fingers) throw Error(Errc::kInvalidArgument, "event finger out of range");
    }
    if (!(ev.position >= 0.0 && ev.position <= 1.0))
      throw Error(Errc::kInvalidArgument, "contact position must lie in [0, 1]");
    if (ev.object.fill_fraction && !(*ev.object.fill_fraction >= 0.0 && *ev.object.fill_fraction <= 1.0))
      throw Error(Errc::kInvalidArgument, "fill fraction must lie in [0, 1]");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& other = s.events[j];
      const bool overlap = ev.t_start_s < other.t_end_s && other.t_start_s < ev.t_end_s;
      if (!overlap) continue;
      for (unsigned f : ev.fingers) {
        if (touches(other, f))
          throw Error(Errc::kOverlappingEvents, "events " + std::to_string(j) + " and " +
                                                    std::to_string(i) + " overlap on finger " +
                                                    std::to_string(f));
      }
    }
  }
}

const ScenarioEvent* event_at(const ScenarioScript& script, unsigned finger, double t_s) {
  for (const auto& ev : script.events) {
    if (t_s >= ev.t_start_s && t_s < ev.t_end_s && touches(ev, finger)) return &ev;
  }
  return nullptr;
}

dsp::WindowLabeler make_labeler(const ScenarioScript& script) {
  return [script](unsigned finger, TimestampNs center) -> std::optional<std::pair<Action, Material>> {
    const ScenarioEvent* ev = event_at(script, finger, center.seconds());
    if (!ev) return std::nullopt;
    const auto material = touch_material(ev->object.material);
    if (!material) return std::nullopt;
    switch (ev->kind) {
      case EventKind::kSlide: return std::pair{Action::kSlide, *material};
      case EventKind::kTap: return std::pair{Action::kTap, *material};
      case EventKind::kStir: return std::pair{Action::kStir, *material};
      default: return std::nullopt;
    }
  };
}

RecordLog run_scenario(const ScenarioScript& script) {
  validate_script(script);
  const Context cx{script, draw_events(script)};

  RecordLog log;
  std::vector<std::vector<ModalitySample>> streams;
  for (unsigned f = 0; f < script.fingers; ++f) {
    for (ModalityKind kind : kAllModalities) {
      if (std::find(script.modalities.begin(), script.modalities.end(), kind) ==
          script.modalities.end())
        continue;
      StreamDescriptor d = default_descriptor(kind, make_stream_id(f, kind));
      if (kind == ModalityKind::kVisuotactile) d.rate_hz = script.visuotactile_rate_hz;
      if (kind == ModalityKind::kSurfaceAudio) d.rate_hz = script.audio_rate_hz;
      if (kind == ModalityKind::kGas) d.rate_hz = script.gas.rate_hz;
      log.streams.push_back(d);
      switch (kind) {
        case ModalityKind::kVisuotactile: streams.push_back(gen_visuo_stream(cx, f)); break;
        case ModalityKind::kSurfaceAudio: streams.push_back(gen_audio(cx, f)); break;
        case ModalityKind::kSurfacePressure: streams.push_back(gen_pressure(cx, f)); break;
        case ModalityKind::kInertial: streams.push_back(gen_inertial(cx, f)); break;
        case ModalityKind::kGas: streams.push_back(gen_gas_stream(cx, f)); break;
        case ModalityKind::kHeat: streams.push_back(gen_heat(cx, f)); break;
      }
    }
  }

  std::size_t total = 0;
  for (const auto& s : streams) total += s.size();
  log.samples.reserve(total);
  for (auto& s : streams) {
    for (auto& sample : s) log.samples.push_back(std::move(sample));
  }
  std::stable_sort(log.samples.begin(), log.samples.end(),
                   [](const ModalitySample& a, const ModalitySample& b) {
                     return a.t.value != b.t.value ? a.t.value < b.t.value
                                                   : a.stream_id < b.stream_id;
                   });
  return log;
}

}  // namespace tactile::synth
