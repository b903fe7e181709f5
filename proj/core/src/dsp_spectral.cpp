#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "fft.hpp"
#include "tactile/dsp.hpp"
#include "tactile/error.hpp"

namespace tactile::dsp {
namespace {

double nyquist_or(const SpectrogramSpec& spec) {
  return spec.f_max_hz > 0.0 ? spec.f_max_hz : spec.sample_rate_hz / 2.0;
}

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

void check_spec(const SpectrogramSpec& spec) {
  if (spec.n_fft < 2 || spec.n_overlap >= spec.n_fft || spec.mel_bands == 0 ||
      spec.output_columns == 0 || !(spec.sample_rate_hz > 0.0)) {
    throw Error(Errc::kInvalidArgument, "invalid spectrogram spec");
  }
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_band_edges(const SpectrogramSpec& spec) {
  const double lo = hz_to_mel(spec.f_min_hz);
  const double hi = hz_to_mel(nyquist_or(spec));
  std::vector<double> edges(spec.mel_bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(spec.mel_bands + 1));
  }
  return edges;
}

std::vector<double> mel_filterbank(const SpectrogramSpec& spec) {
  check_spec(spec);
  const std::size_t bins = spec.n_fft / 2 + 1;
  const double bin_hz = spec.sample_rate_hz / static_cast<double>(spec.n_fft);
  const auto edges = mel_band_edges(spec);
  std::vector<double> fb(spec.mel_bands * bins, 0.0);
  for (std::size_t b = 0; b < spec.mel_bands; ++b) {
    const double left = edges[b], center = edges[b + 1], right = edges[b + 2];
    double* row = fb.data() + b * bins;
    double sum = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) w = (f - left) / (center - left);
      else if (f > center && f < right) w = (right - f) / (right - center);
      row[k] = w;
      sum += w;
    }
    if (sum <= 0.0) {
      // Band narrower than one bin: take the bin nearest its center.
      const auto k = std::min(bins - 1, static_cast<std::size_t>(std::lround(center / bin_hz)));
      row[k] = 1.0;
      sum = 1.0;
    }
    for (std::size_t k = 0; k < bins; ++k) row[k] /= sum;
  }
  return fb;
}

MelPower mel_power(std::span<const double> audio, const SpectrogramSpec& spec) {
  check_spec(spec);
  if (audio.size() < spec.n_fft)
    throw Error(Errc::kTooShort, "audio shorter than n_fft");
  const std::size_t hop = spec.n_fft - spec.n_overlap;
  const std::size_t frames = 1 + (audio.size() - spec.n_fft) / hop;
  const std::size_t bins = spec.n_fft / 2 + 1;
  const auto fb = mel_filterbank(spec);
  const auto window = hann(spec.n_fft);
  const auto& fft = detail::real_fft(spec.n_fft);

  MelPower out;
  out.bands = spec.mel_bands;
  out.frames = frames;
  out.values.assign(out.bands * frames, 0.0);
  // Each triangle covers a short run of bins; only that run is summed.
  std::vector<std::pair<std::size_t, std::size_t>> support(out.bands, {0, 0});
  for (std::size_t b = 0; b < out.bands; ++b) {
    const double* row = fb.data() + b * bins;
    std::size_t lo = 0, hi = bins;
    while (lo < bins && row[lo] == 0.0) ++lo;
    while (hi > lo && row[hi - 1] == 0.0) --hi;
    support[b] = {lo, hi};
  }
  std::vector<double> buf(spec.n_fft);
  std::vector<double> power(bins);
  for (std::size_t f = 0; f < frames; ++f) {
    const double* src = audio.data() + f * hop;
    for (std::size_t i = 0; i < spec.n_fft; ++i) buf[i] = src[i] * window[i];
    const auto spectrum = fft.forward(buf);
    for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(spectrum[k]);
    for (std::size_t b = 0; b < out.bands; ++b) {
      const double* row = fb.data() + b * bins;
      double acc = 0.0;
      for (std::size_t k = support[b].first; k < support[b].second; ++k) acc += row[k] * power[k];
      out.values[b * frames + f] = acc;
    }
  }
  return out;
}

MelImage mel_spectrogram(std::span<const double> audio, const SpectrogramSpec& spec) {
  const MelPower mp = mel_power(audio, spec);
  MelImage img;
  img.rows = mp.bands;
  img.cols = spec.output_columns;
  img.values.assign(img.rows * img.cols, 0.0f);

  std::vector<double> db(mp.values.size());
  for (std::size_t i = 0; i < db.size(); ++i)
    db[i] = 10.0 * std::log10(std::max(mp.values[i], 1e-12));

  std::vector<double> resampled(img.rows * img.cols);
  for (std::size_t c = 0; c < img.cols; ++c) {
    const double pos = img.cols == 1 || mp.frames == 1
                           ? 0.0
                           : static_cast<double>(c) * static_cast<double>(mp.frames - 1) /
                                 static_cast<double>(img.cols - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, mp.frames - 1);
    const double frac = pos - static_cast<double>(lo);
    for (std::size_t r = 0; r < img.rows; ++r) {
      const double a = db[r * mp.frames + lo];
      const double b = db[r * mp.frames + hi];
      resampled[r * img.cols + c] = a + (b - a) * frac;
    }
  }
  const auto [mn, mx] = std::minmax_element(resampled.begin(), resampled.end());
  const double range = *mx - *mn;
  if (range > 1e-9) {
    for (std::size_t i = 0; i < resampled.size(); ++i)
      img.values[i] = static_cast<float>((resampled[i] - *mn) / range);
  }
  return img;
}

double peak_frequency(std::span<const double> series, double rate_hz) {
  if (series.size() < 256) throw Error(Errc::kTooShort, "peak_frequency needs >= 256 samples");
  if (!(rate_hz > 0.0)) throw Error(Errc::kZeroRate, "peak_frequency rate");
  const std::size_t n = series.size();
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  const auto w = hann(n);
  std::vector<double> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = (series[i] - mean) * w[i];

  const std::size_t nfft = next_pow2(2 * n);
  const auto spectrum = detail::real_fft(nfft).forward(buf);
  std::vector<double> mag(spectrum.size());
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(spectrum[k]);

  std::size_t best = 1;
  for (std::size_t k = 1; k + 1 < mag.size(); ++k) {
    if (mag[k] > mag[best]) best = k;
  }
  double offset = 0.0;
  if (best >= 1 && best + 1 < mag.size() && mag[best] > 0.0) {
    const double a = std::log(std::max(mag[best - 1], 1e-300));
    const double b = std::log(mag[best]);
    const double c = std::log(std::max(mag[best + 1], 1e-300));
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }
  return (static_cast<double>(best) + offset) * rate_hz / static_cast<double>(nfft);
}

std::vector<double> hilbert_envelope(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n == 0) return {};
  const std::size_t nfft = next_pow2(2 * n);
  const auto half = detail::real_fft(nfft).forward(series);
  std::vector<std::complex<double>> analytic(nfft, {0.0, 0.0});
  analytic[0] = half[0];
  for (std::size_t k = 1; k < nfft / 2; ++k) analytic[k] = 2.0 * half[k];
  analytic[nfft / 2] = half[nfft / 2];
  const auto time = detail::complex_fft(nfft, true).run(analytic);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(time[i]) / static_cast<double>(nfft);
  return env;
}

double decay_time(std::span<const double> series, double rate_hz) {
  if (!(rate_hz > 0.0)) throw Error(Errc::kZeroRate, "decay_time rate");
  if (series.size() < 16) throw Error(Errc::kNoOnset, "series too short for an onset");
  const auto env = hilbert_envelope(series);
  const std::size_t n = env.size();
  const std::size_t usable = n - n / 20;  // analytic-signal edge ripple at the tail

  const auto onset = static_cast<std::size_t>(
      std::max_element(env.begin(), env.begin() + static_cast<std::ptrdiff_t>(usable)) -
      env.begin());
  const double peak = env[onset];
  if (!(peak > 0.0)) throw Error(Errc::kNoOnset, "signal has no energy");

  std::vector<double> tail(env.begin() + static_cast<std::ptrdiff_t>(usable - usable / 10),
                           env.begin() + static_cast<std::ptrdiff_t>(usable));
  std::nth_element(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(tail.size() / 2),
                   tail.end());
  const double floor = tail.empty() ? 0.0 : tail[tail.size() / 2];
  const double stop = std::min(std::max(0.05 * peak, 4.0 * floor), 0.5 * peak);

  std::size_t end = onset;
  while (end + 1 < usable && env[end + 1] > stop) ++end;
  const std::size_t start = onset + (end - onset) / 50;
  if (end <= start + 8) throw Error(Errc::kNoOnset, "decay region too short to fit");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double count = 0;
  for (std::size_t i = start; i <= end; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    const double y = std::log(env[i]);
    sx += t; sy += y; sxx += t * t; sxy += t * y;
    count += 1.0;
  }
  const double denom = count * sxx - sx * sx;
  const double slope = (count * sxy - sx * sy) / denom;
  const double span_s = static_cast<double>(end - start) / rate_hz;
  if (!(slope < 0.0) || std::exp(slope * span_s) > 0.9) {
    throw Error(Errc::kNonDecaying, "envelope does not decay");
  }
  return -1.0 / slope;
}

}  // namespace tactile::dsp
