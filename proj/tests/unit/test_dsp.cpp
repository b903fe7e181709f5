#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tactile/dsp.hpp"
#include "tactile/error.hpp"
#include "tactile/rng.hpp"

using namespace tactile;
using namespace tactile::dsp;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> tone(double f, double fs, std::size_t n, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * kPi * f * static_cast<double>(i) / fs + phase);
  return x;
}

std::vector<double> damped(double f, double tau, double fs, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] = std::exp(-t / tau) * std::sin(2 * kPi * f * t);
  }
  return x;
}

// Peak |y| over the last `tail` samples.
double tail_peak(const std::vector<double>& y, std::size_t tail) {
  double m = 0.0;
  for (std::size_t i = y.size() - tail; i < y.size(); ++i) m = std::max(m, std::abs(y[i]));
  return m;
}

double db(double ratio) { return 20.0 * std::log10(ratio); }

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kInvalidArgument;
}

}  // namespace

TEST(Filter, HighPassRejectsDc) {
  const std::vector<double> x(5000, 3.0);
  const auto y = apply_filter(x, {FilterKind::kHighPass, kPressureHighPassHz, 1, 1000.0});
  EXPECT_LT(tail_peak(y, 1000), 0.01 * 3.0);
}

TEST(Filter, LowPassPassbandAndStopband) {
  const FilterSpec spec{FilterKind::kLowPass, 50.0, 1, 1000.0};
  const auto pass = apply_filter(tone(10.0, 1000.0, 4000), spec);
  EXPECT_NEAR(db(tail_peak(pass, 1000)), 0.0, 1.0);
  // Nyquist-rate alternation; cosine phase so the samples are not all zero.
  const auto stop = apply_filter(tone(500.0, 1000.0, 4000, 1.0, kPi / 2), spec);
  EXPECT_LE(db(tail_peak(stop, 1000)), -20.0);
  const auto near_stop = apply_filter(tone(400.0, 1000.0, 4000), spec);
  EXPECT_LE(db(tail_peak(near_stop, 1000)), -20.0);
}

TEST(Filter, CascadeGainAgreesWithMeasuredSteadyState) {
  const FilterSpec spec{FilterKind::kLowPass, 50.0, 2, 1000.0};
  const auto sections = design_butterworth(spec);
  for (double f : {5.0, 30.0, 50.0, 120.0}) {
    const auto y = apply_filter(tone(f, 1000.0, 6000), spec);
    EXPECT_NEAR(tail_peak(y, 2000), cascade_gain(sections, f, 1000.0), 0.01) << f;
  }
  EXPECT_NEAR(cascade_gain(sections, 50.0, 1000.0), std::sqrt(0.5), 1e-6);
}

TEST(Filter, RejectsCutoffsOutsideNyquist) {
  EXPECT_EQ(code_of([] { design_butterworth({FilterKind::kLowPass, 600.0, 1, 1000.0}); }),
            Errc::kNyquistViolation);
  EXPECT_EQ(code_of([] { design_butterworth({FilterKind::kHighPass, 0.0, 1, 1000.0}); }),
            Errc::kNyquistViolation);
  EXPECT_EQ(code_of([] { design_butterworth({FilterKind::kLowPass, 500.0, 1, 1000.0}); }),
            Errc::kNyquistViolation);
}

TEST(PressureChain, ConstantSettlesToZero) {
  const std::vector<double> x(5000, 2.5);
  const auto y = pressure_preprocess(x, 1000.0);
  EXPECT_LT(tail_peak(y, 1000), 1e-3);
}

TEST(PressureChain, StepGivesTransientThatDecays) {
  std::vector<double> x(6000, 0.0);
  std::fill(x.begin() + 1000, x.end(), 1.0);
  const auto y = pressure_preprocess(x, 1000.0);
  const auto it = std::max_element(y.begin(), y.end());
  const auto at = static_cast<std::size_t>(it - y.begin());
  EXPECT_GT(*it, 0.5);
  EXPECT_GE(at, 1000u);
  EXPECT_LT(at, 1030u);
  EXPECT_LT(tail_peak(y, 1000), 0.05);
}

TEST(PressureChain, FiveHertzPasses) {
  const auto y = pressure_preprocess(tone(5.0, 1000.0, 8000), 1000.0);
  EXPECT_NEAR(db(tail_peak(y, 2000)), 0.0, 1.0);
}

TEST(PressureChain, StreamingMatchesBatch) {
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(3000);
  for (auto& v : x) v = n(rng);
  const auto batch = pressure_preprocess(x, 1000.0);
  PressureChain chain(1000.0);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_DOUBLE_EQ(chain.process(x[i]), batch[i]);
}

TEST(PressureChain, IsLinear) {
  Rng rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(2000), y(2000), mix(2000);
    const double a = coef(rng), b = coef(rng);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = n(rng);
      y[i] = n(rng);
      mix[i] = a * x[i] + b * y[i];
    }
    const auto fx = pressure_preprocess(x, 1000.0);
    const auto fy = pressure_preprocess(y, 1000.0);
    const auto fm = pressure_preprocess(mix, 1000.0);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(fm[i], a * fx[i] + b * fy[i], 1e-9);
  }
}

TEST(Mel, ScaleRoundTrip) {
  for (double hz : {0.0, 100.0, 700.0, 1000.0, 8000.0, 24000.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-6);
  EXPECT_NEAR(hz_to_mel(1000.0), 1000.0, 1.0);
}

TEST(Mel, FilterbankRowsSumToOne) {
  const SpectrogramSpec spec;
  const auto fb = mel_filterbank(spec);
  const std::size_t bins = spec.n_fft / 2 + 1;
  ASSERT_EQ(fb.size(), spec.mel_bands * bins);
  for (std::size_t b = 0; b < spec.mel_bands; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      EXPECT_GE(fb[b * bins + k], 0.0);
      s += fb[b * bins + k];
    }
    EXPECT_NEAR(s, 1.0, 1e-9) << "band " << b;
  }
}

TEST(Mel, ImageShapeAndRange) {
  Rng rng(2);
  std::normal_distribution<double> n(0.0, 0.2);
  std::vector<double> x(48000 * 133 / 100);
  for (auto& v : x) v = n(rng);
  const auto img = mel_spectrogram(x);
  EXPECT_EQ(img.rows, 64u);
  EXPECT_EQ(img.cols, 64u);
  ASSERT_EQ(img.values.size(), 64u * 64u);
  const auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
  EXPECT_FLOAT_EQ(*lo, 0.0f);
  EXPECT_FLOAT_EQ(*hi, 1.0f);
}

TEST(Mel, SilenceIsUniform) {
  const std::vector<double> x(48000, 0.0);
  const auto img = mel_spectrogram(x);
  ASSERT_EQ(img.values.size(), 64u * 64u);
  for (float v : img.values) ASSERT_EQ(v, img.values.front());
}

TEST(Mel, ToneLandsInItsBand) {
  const SpectrogramSpec spec;
  const auto img = mel_spectrogram(tone(1000.0, 48000.0, 48000, 0.5), spec);
  const auto edges = mel_band_edges(spec);
  std::vector<double> row_mean(img.rows, 0.0);
  for (std::size_t r = 0; r < img.rows; ++r)
    for (std::size_t c = 0; c < img.cols; ++c) row_mean[r] += img.at(r, c);
  const auto best = static_cast<std::size_t>(std::max_element(row_mean.begin(), row_mean.end()) - row_mean.begin());
  EXPECT_LE(edges[best], 1000.0);
  EXPECT_GE(edges[best + 2], 1000.0);
}

TEST(Mel, WhiteNoiseIsSpectrallyFlat) {
  const SpectrogramSpec spec;
  Rng rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(48000 * 4);
  for (auto& v : x) v = n(rng);
  const auto p = mel_power(x, spec);
  std::vector<double> band(p.bands, 0.0);
  for (std::size_t b = 0; b < p.bands; ++b) {
    for (std::size_t f = 0; f < p.frames; ++f) band[b] += p.at(b, f);
    band[b] /= static_cast<double>(p.frames);
  }
  std::vector<double> sorted = band;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  for (std::size_t b = 0; b < p.bands; ++b) EXPECT_NEAR(band[b] / median, 1.0, 0.35) << "band " << b;
}

TEST(PeakFrequency, PureToneWithinHalfBin) {
  const std::size_t n = 4800;
  const double bin = 48000.0 / static_cast<double>(next_pow2(2 * n));
  EXPECT_NEAR(peak_frequency(tone(440.0, 48000.0, n), 48000.0), 440.0, bin / 2);
}

TEST(PeakFrequency, DampedToneWithinOneBin) {
  const std::size_t n = 9600;
  const double bin = 48000.0 / static_cast<double>(next_pow2(2 * n));
  EXPECT_NEAR(peak_frequency(damped(800.0, 0.03, 48000.0, n), 48000.0), 800.0, bin);
}

TEST(PeakFrequency, NoiseAndShortInput) {
  Rng rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(2048);
  for (auto& v : x) v = n(rng);
  double f = -1.0;
  EXPECT_NO_THROW(f = peak_frequency(x, 48000.0));
  EXPECT_GE(f, 0.0);
  EXPECT_LE(f, 24000.0);
  EXPECT_EQ(code_of([] { peak_frequency(std::vector<double>(100, 1.0), 48000.0); }), Errc::kTooShort);
}

TEST(DecayTime, RecoversExponentialConstant) {
  for (double tau : {0.1, 0.02}) {
    const auto x = damped(1000.0, tau, 48000.0, 48000);
    EXPECT_NEAR(decay_time(x, 48000.0), tau, 0.05 * tau);
  }
}

TEST(DecayTime, SteadyToneIsNonDecaying) {
  EXPECT_EQ(code_of([] { decay_time(tone(1000.0, 48000.0, 48000), 48000.0); }), Errc::kNonDecaying);
  EXPECT_EQ(code_of([] { decay_time(std::vector<double>(1000, 0.0), 48000.0); }), Errc::kNoOnset);
}

TEST(Envelope, ConstantAmplitudeTone) {
  const auto env = hilbert_envelope(tone(1200.0, 48000.0, 4800, 0.7));
  for (std::size_t i = 500; i + 500 < env.size(); ++i) ASSERT_NEAR(env[i], 0.7, 0.01);
}
