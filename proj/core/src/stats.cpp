#include "tactile/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tactile/error.hpp"

namespace tactile {

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(Errc::kTooFewSamples, "percentile of empty set");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::kTooFewSamples, "summary of empty set");
  SummaryStats s;
  double sum = 0.0;
  for (double x : values) sum += x;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double x : values) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  auto pct = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
  };
  s.p50 = pct(0.50);
  s.p95 = pct(0.95);
  s.p99 = pct(0.99);
  s.min = v.front();
  s.max = v.back();
  return s;
}

}  // namespace tactile
