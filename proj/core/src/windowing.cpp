#include "tactile/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tactile/dsp.hpp"
#include "tactile/error.hpp"

namespace tactile::dsp {

namespace {

using W = WindowSample;

constexpr std::array<ModalityKind, 4> kWindowKinds = {
    ModalityKind::kVisuotactile, ModalityKind::kSurfaceAudio, ModalityKind::kSurfacePressure,
    ModalityKind::kInertial};

std::uint64_t sample_index(TimestampNs t, double rate) {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(t.value) * rate * 1e-9));
}

// Per-finger series decoded from the log.
struct FingerData {
  unsigned finger = 0;
  const StreamDescriptor* desc[4] = {nullptr, nullptr, nullptr, nullptr};

  std::vector<std::uint64_t> frame_t;
  std::vector<const ImageFrame*> frames;

  double audio_rate = 0.0;
  std::uint64_t audio_first = 0;  // sample index of audio[c][0]
  std::array<std::vector<double>, 4> audio;

  std::vector<std::uint64_t> pressure_t;
  std::array<std::vector<double>, 4> pressure;  // after the HPF/LPF chain

  std::vector<std::uint64_t> inertial_t;
  std::array<std::vector<double>, 3> inertial;

  std::uint64_t end_ns = 0;
};

std::uint64_t coverage_end(std::uint64_t last_index_exclusive, double rate) {
  return sample_time(last_index_exclusive, rate).value;
}

void decode_finger(const RecordLog& log, FingerData& fd) {
  std::uint64_t end = UINT64_MAX;
  std::array<std::vector<double>, 4> raw_pressure;

  for (const auto& s : log.samples) {
    if (finger_of(s.stream_id) != fd.finger) continue;
    const auto kind = static_cast<ModalityKind>(s.stream_id & 0xFF);
    if (const auto* img = std::get_if<ImageFrame>(&s.payload);
        img && kind == ModalityKind::kVisuotactile) {
      if (img->channels != W::kImageChannels)
        throw Error(Errc::kShapeMismatch, "visuotactile frames must have 3 channels");
      fd.frame_t.push_back(s.t.value);
      fd.frames.push_back(img);
    } else if (const auto* a = std::get_if<AudioFrame>(&s.payload);
               a && kind == ModalityKind::kSurfaceAudio) {
      if (a->channels != W::kAudioChannels)
        throw Error(Errc::kShapeMismatch, "window audio needs 4 channels");
      const std::uint64_t first = sample_index(s.t, fd.audio_rate);
      if (fd.audio[0].empty()) fd.audio_first = first;
      const std::size_t offset = first - fd.audio_first;
      const std::size_t n = a->frames();
      for (std::size_t c = 0; c < 4; ++c) {
        auto& ch = fd.audio[c];
        if (ch.size() < offset + n) ch.resize(offset + n, 0.0);
        for (std::size_t i = 0; i < n; ++i) ch[offset + i] = a->samples[i * 4 + c] / 32768.0;
      }
    } else if (const auto* p = std::get_if<PressureReading>(&s.payload)) {
      fd.pressure_t.push_back(s.t.value);
      for (std::size_t c = 0; c < 4; ++c) raw_pressure[c].push_back(p->channels[c]);
    } else if (const auto* in = std::get_if<InertialReading>(&s.payload)) {
      fd.inertial_t.push_back(s.t.value);
      for (std::size_t k = 0; k < 3; ++k) fd.inertial[k].push_back(in->accel_mps2[k]);
    }
  }

  if (fd.frames.empty() || fd.audio[0].empty() || fd.pressure_t.empty() || fd.inertial_t.empty())
    throw Error(Errc::kInsufficientData, "finger " + std::to_string(fd.finger) + " has an empty stream");

  const double vrate = fd.desc[0]->rate_hz;
  end = std::min(end, coverage_end(sample_index(TimestampNs{fd.frame_t.back()}, vrate) + 1, vrate));
  end = std::min(end, coverage_end(fd.audio_first + fd.audio[0].size(), fd.audio_rate));
  const double prate = fd.desc[2]->rate_hz;
  end = std::min(end, coverage_end(sample_index(TimestampNs{fd.pressure_t.back()}, prate) + 1, prate));
  const double irate = fd.desc[3]->rate_hz;
  end = std::min(end, coverage_end(sample_index(TimestampNs{fd.inertial_t.back()}, irate) + 1, irate));
  fd.end_ns = end;

  // The chain starts in steady state for the first reading, so the static
  // baseline does not produce a start-up transient.
  for (std::size_t c = 0; c < 4; ++c) {
    auto& x = raw_pressure[c];
    const double x0 = x.front();
    for (double& v : x) v -= x0;
    fd.pressure[c] = pressure_preprocess(x, prate);
  }
}

// Mean of each series over the samples whose time lies in [t0, t1).
template <std::size_t N>
std::array<double, N> bin_mean(const std::vector<std::uint64_t>& t,
                               const std::array<std::vector<double>, N>& series, std::uint64_t t0,
                               std::uint64_t t1) {
  const auto lo = std::lower_bound(t.begin(), t.end(), t0) - t.begin();
  const auto hi = std::lower_bound(t.begin(), t.end(), t1) - t.begin();
  if (hi <= lo) throw Error(Errc::kInsufficientData, "no samples in a window bin");
  std::array<double, N> out{};
  for (std::size_t k = 0; k < N; ++k) {
    double s = 0.0;
    for (auto i = lo; i < hi; ++i) s += series[k][static_cast<std::size_t>(i)];
    out[k] = s / static_cast<double>(hi - lo);
  }
  return out;
}

void copy_frame(const ImageFrame& src, std::uint8_t* dst) {
  constexpr std::size_t side = W::kImageSide;
  if (src.width == side && src.height == side) {
    std::copy(src.pixels.begin(), src.pixels.end(), dst);
    return;
  }
  const double sx = static_cast<double>(src.width) / side;
  const double sy = static_cast<double>(src.height) / side;
  for (std::size_t y = 0; y < side; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min<std::size_t>(y0 + 1, src.height - 1u);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < side; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min<std::size_t>(x0 + 1, src.width - 1u);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < 3; ++c) {
        auto px = [&](std::size_t xx, std::size_t yy) {
          return static_cast<double>(src.pixels[(yy * src.width + xx) * 3 + c]);
        };
        const double v = (1 - wy) * ((1 - wx) * px(x0, y0) + wx * px(x1, y0)) +
                         wy * ((1 - wx) * px(x0, y1) + wx * px(x1, y1));
        dst[(y * side + x) * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
}

WindowSample make_window(const FingerData& fd, std::uint64_t start, std::uint64_t dur,
                         const WindowLabeler& labeler) {
  WindowSample w;
  w.start = TimestampNs{start};
  w.finger_id = static_cast<std::uint8_t>(fd.finger);
  const std::uint64_t end = start + dur;
  constexpr std::size_t T = W::kFrames;

  // Visuotactile: T frames at uniform strides through the window.
  const auto f_lo = std::lower_bound(fd.frame_t.begin(), fd.frame_t.end(), start) - fd.frame_t.begin();
  const auto f_hi = std::lower_bound(fd.frame_t.begin(), fd.frame_t.end(), end) - fd.frame_t.begin();
  const auto m = static_cast<std::size_t>(f_hi - f_lo);
  if (m < T) throw Error(Errc::kInsufficientData, "fewer than 10 visuotactile frames in a window");
  constexpr std::size_t frame_px = W::kImageSide * W::kImageSide * W::kImageChannels;
  w.visuotactile.resize(T * frame_px);
  for (std::size_t j = 0; j < T; ++j) {
    const std::size_t idx = static_cast<std::size_t>(f_lo) + j * m / T;
    copy_frame(*fd.frames[idx], w.visuotactile.data() + j * frame_px);
  }

  w.pressure.resize(T * W::kPressureChannels);
  w.inertial.resize(T * W::kInertialAxes);
  for (std::size_t j = 0; j < T; ++j) {
    const std::uint64_t b0 = start + dur * j / T;
    const std::uint64_t b1 = start + dur * (j + 1) / T;
    const auto p = bin_mean(fd.pressure_t, fd.pressure, b0, b1);
    const auto a = bin_mean(fd.inertial_t, fd.inertial, b0, b1);
    for (std::size_t c = 0; c < 4; ++c) w.pressure[j * 4 + c] = static_cast<float>(p[c]);
    for (std::size_t k = 0; k < 3; ++k) w.inertial[j * 3 + k] = static_cast<float>(a[k]);
  }

  // Audio: one mel image per channel, time pooled into T rows.
  const std::uint64_t a0 = sample_index(TimestampNs{start}, fd.audio_rate);
  const std::uint64_t a1 = sample_index(TimestampNs{end}, fd.audio_rate);
  if (a0 < fd.audio_first || a1 > fd.audio_first + fd.audio[0].size())
    throw Error(Errc::kInsufficientData, "audio does not cover the window");
  SpectrogramSpec spec;
  spec.sample_rate_hz = fd.audio_rate;
  w.audio.assign(W::kAudioRows * W::kMelBands, 0.0f);
  for (std::size_t c = 0; c < W::kAudioChannels; ++c) {
    const std::span<const double> seg(fd.audio[c].data() + (a0 - fd.audio_first), a1 - a0);
    const MelImage img = mel_spectrogram(seg, spec);
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t c0 = t * img.cols / T;
      const std::size_t c1 = std::max(c0 + 1, (t + 1) * img.cols / T);
      for (std::size_t b = 0; b < W::kMelBands; ++b) {
        double s = 0.0;
        for (std::size_t col = c0; col < c1; ++col) s += img.at(b, col);
        w.audio[(t * W::kAudioChannels + c) * W::kMelBands + b] =
            static_cast<float>(s / static_cast<double>(c1 - c0));
      }
    }
  }

  if (labeler) {
    if (auto lab = labeler(fd.finger, TimestampNs{start + dur / 2})) {
      w.action = lab->first;
      w.material = lab->second;
    }
  }
  return w;
}

}  // namespace

std::size_t window_count(std::uint64_t end_ns, const WindowOptions& options) {
  if (!(options.stride_s > 0.0)) throw Error(Errc::kInvalidArgument, "stride must be positive");
  const auto stride = static_cast<std::uint64_t>(std::llround(options.stride_s * 1e9));
  const auto offset = static_cast<std::uint64_t>(std::llround(std::max(0.0, options.offset_s) * 1e9));
  if (offset + W::kDurationNs > end_ns) return 0;
  return static_cast<std::size_t>((end_ns - offset - W::kDurationNs) / stride + 1);
}

void for_each_window(const RecordLog& log, const WindowOptions& options,
                     const WindowLabeler& labeler,
                     const std::function<void(WindowSample&&)>& sink) {
  std::map<unsigned, FingerData> fingers;
  for (const auto& d : log.streams) {
    const auto it = std::find(kWindowKinds.begin(), kWindowKinds.end(), d.kind);
    if (it == kWindowKinds.end()) continue;
    auto& fd = fingers[finger_of(d.stream_id)];
    fd.finger = finger_of(d.stream_id);
    fd.desc[it - kWindowKinds.begin()] = &d;
  }
  if (fingers.empty()) throw Error(Errc::kMissingModality, "log has no window modalities");
  std::uint64_t end = UINT64_MAX;
  for (auto& [f, fd] : fingers) {
    for (std::size_t k = 0; k < 4; ++k) {
      if (!fd.desc[k])
        throw Error(Errc::kMissingModality, "finger " + std::to_string(f) + " lacks " +
                                                std::string(modality_name(kWindowKinds[k])));
    }
    fd.audio_rate = fd.desc[1]->rate_hz;
    decode_finger(log, fd);
    end = std::min(end, fd.end_ns);
  }

  const std::size_t count = window_count(end, options);
  const auto stride = static_cast<std::uint64_t>(std::llround(options.stride_s * 1e9));
  const auto offset = static_cast<std::uint64_t>(std::llround(std::max(0.0, options.offset_s) * 1e9));
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t start = offset + k * stride;
    for (const auto& [f, fd] : fingers) sink(make_window(fd, start, W::kDurationNs, labeler));
  }
}

std::vector<WindowSample> build_windows(const RecordLog& log, double stride_s,
                                        const WindowLabeler& labeler) {
  std::vector<WindowSample> out;
  for_each_window(log, WindowOptions{stride_s, 0.0}, labeler,
                  [&](WindowSample&& w) { out.push_back(std::move(w)); });
  return out;
}

}  // namespace tactile::dsp
