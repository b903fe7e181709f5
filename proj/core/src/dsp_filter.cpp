#include <cmath>
#include <complex>
#include <numbers>

#include "tactile/dsp.hpp"
#include "tactile/error.hpp"

namespace tactile::dsp {

std::vector<BiquadCoeffs> design_butterworth(const FilterSpec& spec) {
  if (!(spec.sample_rate_hz > 0.0) || !(spec.fc_hz > 0.0) ||
      !(spec.fc_hz < spec.sample_rate_hz / 2.0)) {
    throw Error(Errc::kNyquistViolation,
                "cutoff " + std::to_string(spec.fc_hz) + " Hz outside (0, fs/2)");
  }
  if (spec.order < 1) throw Error(Errc::kInvalidArgument, "filter order must be >= 1");

  const int n = spec.order;
  const double w0 = 2.0 * std::numbers::pi * spec.fc_hz / spec.sample_rate_hz;
  const double cw = std::cos(w0);
  const double sw = std::sin(w0);

  std::vector<BiquadCoeffs> sections;
  sections.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    // Pole-pair quality factors of a 2n-th order Butterworth prototype.
    const double theta = (2.0 * k - 1.0) * std::numbers::pi / (4.0 * n);
    const double q = 1.0 / (2.0 * std::cos(theta));
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    BiquadCoeffs c;
    if (spec.kind == FilterKind::kLowPass) {
      c.b0 = (1.0 - cw) / 2.0 / a0;
      c.b1 = (1.0 - cw) / a0;
      c.b2 = c.b0;
    } else {
      c.b0 = (1.0 + cw) / 2.0 / a0;
      c.b1 = -(1.0 + cw) / a0;
      c.b2 = c.b0;
    }
    c.a1 = -2.0 * cw / a0;
    c.a2 = (1.0 - alpha) / a0;
    sections.push_back(c);
  }
  return sections;
}

double cascade_gain(std::span<const BiquadCoeffs> sections, double f_hz, double fs_hz) {
  const std::complex<double> z1 =
      std::polar(1.0, -2.0 * std::numbers::pi * f_hz / fs_hz);
  const std::complex<double> z2 = z1 * z1;
  double g = 1.0;
  for (const auto& c : sections) {
    g *= std::abs((c.b0 + c.b1 * z1 + c.b2 * z2) / (1.0 + c.a1 * z1 + c.a2 * z2));
  }
  return g;
}

BiquadCascade::BiquadCascade(std::vector<BiquadCoeffs> sections)
    : sections_(std::move(sections)), state_(sections_.size(), {0.0, 0.0}) {}

double BiquadCascade::process(double x) {
  for (std::size_t i = 0; i < sections_.size(); ++i) {
    const auto& c = sections_[i];
    auto& s = state_[i];
    const double y = c.b0 * x + s[0];
    s[0] = c.b1 * x - c.a1 * y + s[1];
    s[1] = c.b2 * x - c.a2 * y;
    x = y;
  }
  return x;
}

void BiquadCascade::reset() {
  for (auto& s : state_) s = {0.0, 0.0};
}

std::vector<double> apply_filter(std::span<const double> series, const FilterSpec& spec) {
  BiquadCascade cascade(design_butterworth(spec));
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = cascade.process(series[i]);
  return out;
}

std::vector<double> pressure_preprocess(std::span<const double> series, double rate_hz) {
  const auto high = apply_filter(
      series, FilterSpec{FilterKind::kHighPass, kPressureHighPassHz, 1, rate_hz});
  return apply_filter(high, FilterSpec{FilterKind::kLowPass, kPressureLowPassHz, 1, rate_hz});
}

PressureChain::PressureChain(double rate_hz)
    : hpf_(design_butterworth({FilterKind::kHighPass, kPressureHighPassHz, 1, rate_hz})),
      lpf_(design_butterworth({FilterKind::kLowPass, kPressureLowPassHz, 1, rate_hz})) {}

double PressureChain::process(double x) { return lpf_.process(hpf_.process(x)); }

}  // namespace tactile::dsp
