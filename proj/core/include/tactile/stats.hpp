#pragma once

#include <span>

namespace tactile {

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double p50 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Linear-interpolated percentile, q in [0, 1].
double percentile(std::span<const double> values, double q);
SummaryStats summarize(std::span<const double> values);

}  // namespace tactile
