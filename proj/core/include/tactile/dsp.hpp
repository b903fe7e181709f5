#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace tactile::dsp {

enum class FilterKind { kHighPass, kLowPass };

struct FilterSpec {
  FilterKind kind = FilterKind::kLowPass;
  double fc_hz = 50.0;
  int order = 1;  // number of cascaded biquad sections
  double sample_rate_hz = 1000.0;
};

// Pressure chain: static grasp offsets out, contact transients kept.
inline constexpr double kPressureHighPassHz = 0.95;
inline constexpr double kPressureLowPassHz = 50.0;

struct BiquadCoeffs {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;  // a0 normalized to 1
};

// Butterworth sections for the spec; throws NyquistViolation unless
// 0 < fc < fs/2.
std::vector<BiquadCoeffs> design_butterworth(const FilterSpec& spec);

// Complex response magnitude of a cascade at frequency f.
double cascade_gain(std::span<const BiquadCoeffs> sections, double f_hz, double fs_hz);

// Sample-at-a-time cascade (transposed direct form II) with zero initial state.
class BiquadCascade {
 public:
  BiquadCascade() = default;
  explicit BiquadCascade(std::vector<BiquadCoeffs> sections);

  double process(double x);
  void reset();

 private:
  std::vector<BiquadCoeffs> sections_;
  std::vector<std::array<double, 2>> state_;
};

std::vector<double> apply_filter(std::span<const double> series, const FilterSpec& spec);

// High-pass 0.95 Hz followed by low-pass 50 Hz.
std::vector<double> pressure_preprocess(std::span<const double> series, double rate_hz);

// Streaming version of pressure_preprocess for online detectors.
class PressureChain {
 public:
  explicit PressureChain(double rate_hz);
  double process(double x);

 private:
  BiquadCascade hpf_;
  BiquadCascade lpf_;
};

struct SpectrogramSpec {
  std::size_t n_fft = 2048;
  std::size_t n_overlap = 1024;
  std::size_t mel_bands = 64;
  std::size_t output_columns = 64;
  double sample_rate_hz = 48000.0;
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;  // 0 selects Nyquist
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filterbank over the rfft bins, each row summing to one.
// Row-major [band][bin], bins = n_fft / 2 + 1.
std::vector<double> mel_filterbank(const SpectrogramSpec& spec);
// Band edges in Hz (mel_bands + 2 entries); band b spans edges[b]..edges[b+2].
std::vector<double> mel_band_edges(const SpectrogramSpec& spec);

struct MelPower {
  std::size_t bands = 0;
  std::size_t frames = 0;
  std::vector<double> values;  // [band][frame], power |X|^2 through the filterbank

  double at(std::size_t band, std::size_t frame) const { return values[band * frames + frame]; }
};

MelPower mel_power(std::span<const double> audio, const SpectrogramSpec& spec);

struct MelImage {
  std::size_t rows = 0;  // mel bands, row 0 lowest
  std::size_t cols = 0;  // time
  std::vector<float> values;

  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Power STFT -> mel bands -> dB -> time resampled to output_columns ->
// per-image min-max normalization to [0, 1]. A constant input maps to zeros.
MelImage mel_spectrogram(std::span<const double> audio, const SpectrogramSpec& spec = {});

// Frequency of the spectral peak, parabolic-interpolated. Needs >= 256 samples.
double peak_frequency(std::span<const double> series, double rate_hz);

// Exponential decay constant of the signal envelope after its onset.
double decay_time(std::span<const double> series, double rate_hz);

// Magnitude of the analytic signal.
std::vector<double> hilbert_envelope(std::span<const double> series);

std::size_t next_pow2(std::size_t n);

}  // namespace tactile::dsp
