#include "tactile_cli/liquid.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/dsp.hpp"
#include "tactile/error.hpp"

namespace tactile::cli {

std::string_view fill_level_name(FillLevel level) {
  switch (level) {
    case FillLevel::kEmpty: return "empty";
    case FillLevel::kHalf: return "half";
    case FillLevel::kFull: return "full";
  }
  return "?";
}

double fill_fraction(FillLevel level) {
  switch (level) {
    case FillLevel::kEmpty: return 0.0;
    case FillLevel::kHalf: return 0.5;
    case FillLevel::kFull: return 1.0;
  }
  return 0.0;
}

std::vector<double> audio_track(const RecordLog& log, std::uint16_t stream_id, double* rate_hz) {
  const StreamDescriptor* desc = log.find_stream(stream_id);
  if (!desc || desc->kind != ModalityKind::kSurfaceAudio)
    throw Error(Errc::kNoTapsFound, "no audio stream with that id");
  if (rate_hz) *rate_hz = desc->rate_hz;
  std::vector<double> out;
  for (const auto& s : log.samples) {
    if (s.stream_id != stream_id) continue;
    const auto* a = std::get_if<AudioFrame>(&s.payload);
    if (!a || a->channels == 0) continue;
    for (std::size_t i = 0; i < a->frames(); ++i) out.push_back(a->samples[i * a->channels] / 32768.0);
  }
  return out;
}

std::vector<std::size_t> detect_taps(std::span<const double> audio, double rate_hz,
                                     const LiquidOptions& options) {
  std::vector<std::size_t> onsets;
  if (audio.size() < 16) return onsets;
  const auto env = dsp::hilbert_envelope(audio);
  std::vector<double> sorted = env;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                   sorted.end());
  const double floor = sorted[sorted.size() / 2];
  const double peak = *std::max_element(env.begin(), env.end());
  const double threshold = options.threshold_factor * floor;
  if (!(peak > threshold) || !(threshold > 0.0)) return onsets;

  const auto rearm = static_cast<std::size_t>(options.rearm_s * rate_hz);
  bool armed = true;
  std::size_t quiet = 0;
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (armed) {
      if (env[i] >= threshold) {
        onsets.push_back(i);
        armed = false;
        quiet = 0;
      }
    } else if (env[i] < threshold) {
      if (++quiet >= rearm) armed = true;
    } else {
      quiet = 0;
    }
  }
  return onsets;
}

FillLevel classify_fill(double peak_hz, const synth::RingdownParams& ringdown) {
  FillLevel best = FillLevel::kEmpty;
  double best_d = INFINITY;
  for (FillLevel l : kFillLevels) {
    const double d = std::abs(peak_hz - ringdown.frequency(fill_fraction(l)));
    if (d < best_d) {
      best_d = d;
      best = l;
    }
  }
  return best;
}

LiquidAnalysis analyze_liquid(const RecordLog& log, const LiquidOptions& options) {
  const StreamDescriptor* audio = nullptr;
  for (const auto& d : log.streams) {
    if (d.kind != ModalityKind::kSurfaceAudio) continue;
    if (options.finger && finger_of(d.stream_id) != *options.finger) continue;
    if (!audio || d.stream_id < audio->stream_id) audio = &d;
  }
  if (!audio) throw Error(Errc::kNoTapsFound, "log has no audio stream");

  double rate = 0.0;
  const auto track = audio_track(log, audio->stream_id, &rate);
  const auto onsets = detect_taps(track, rate, options);

  LiquidAnalysis out;
  for (std::size_t i = 0; i < 3; ++i) out.centroid_hz[i] = options.ringdown.frequency(fill_fraction(kFillLevels[i]));

  const auto seg_len = static_cast<std::size_t>(options.segment_s * rate);
  const std::size_t lead = static_cast<std::size_t>(0.001 * rate);
  for (std::size_t k = 0; k < onsets.size(); ++k) {
    const std::size_t start = onsets[k] > lead ? onsets[k] - lead : 0;
    std::size_t end = std::min(track.size(), start + seg_len);
    if (k + 1 < onsets.size()) end = std::min(end, onsets[k + 1] > lead ? onsets[k + 1] - lead : 0);
    if (end <= start + 256) continue;
    const std::span<const double> seg(track.data() + start, end - start);
    const auto peak_at = static_cast<std::size_t>(
        std::max_element(seg.begin(), seg.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        seg.begin());
    if (static_cast<double>(peak_at) / rate > options.max_rise_s + 0.001) continue;
    TapFeatures f;
    f.finger = finger_of(audio->stream_id);
    f.onset_s = static_cast<double>(onsets[k]) / rate;
    try {
      f.tau_s = dsp::decay_time(seg, rate);
    } catch (const Error&) {
      continue;
    }
    if (!(f.tau_s >= options.min_tau_s)) continue;
    f.peak_hz = dsp::peak_frequency(seg, rate);
    f.bin_hz = rate / static_cast<double>(dsp::next_pow2(2 * seg.size()));
    f.level = classify_fill(f.peak_hz, options.ringdown);
    ++out.votes[static_cast<std::size_t>(f.level)];
    out.taps.push_back(f);
  }
  if (out.taps.empty()) throw Error(Errc::kNoTapsFound, "no tap episodes in the audio stream");
  out.predicted = kFillLevels[static_cast<std::size_t>(
      std::max_element(out.votes.begin(), out.votes.end()) - out.votes.begin())];
  return out;
}

}  // namespace tactile::cli
