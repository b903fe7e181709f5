#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tactile/nn.hpp"
#include "tactile/rng.hpp"
#include "tactile/stats.hpp"

namespace tactile::link {

inline constexpr double kDefaultBandwidthBytesPerS = 148e6;
inline constexpr double kLatencyBudgetUs = 2463.0;

// Right-skewed positive delay: exp(mu + sigma * z) with z ~ N(0, 1) redrawn
// until |z| <= 5. A zero sigma and zero mean disable it.
struct LogNormalJitter {
  double mu = 0.0;
  double sigma = 0.0;
  bool enabled = false;

  static LogNormalJitter none() { return {}; }
  // Parameters whose untruncated distribution has the given mean and std (us).
  static LogNormalJitter from_moments(double mean_us, double std_us);

  double mean_us() const;
  double draw(Rng& rng) const;
};

struct StageModel {
  double base_us = 0.0;
  LogNormalJitter jitter;

  double mean_us() const { return base_us + jitter.mean_us(); }
  double draw(Rng& rng) const { return base_us + jitter.draw(rng); }
};

struct LinkProfile {
  std::string name;
  double bandwidth_bytes_per_s = kDefaultBandwidthBytesPerS;
  double base_latency_us = 0.0;
  LogNormalJitter jitter;

  double mean_us(std::uint64_t n_bytes) const;
};

// n_bytes / bandwidth + base + one jitter draw, in microseconds.
double simulate_transfer(const LinkProfile& link, std::uint64_t n_bytes, Rng& rng);

enum class PathKind { kHost, kOnDevice, kLegacyHost };

std::string_view path_name(PathKind kind);

// Stage distributions of one processing path. Data transfer and action
// transfer are links; subsampling and actuation are fixed-cost stages.
struct PathProfile {
  PathKind kind = PathKind::kHost;
  std::string name;
  LinkProfile data_link;
  StageModel subsample;
  LinkProfile action_link;
  StageModel action;
  double acquisition_rate_hz = 1000.0;  // native rate of the detecting modality

  static PathProfile host();
  static PathProfile on_device();
  static PathProfile legacy_host();
  PathProfile without_jitter() const;
};

// "host", "device" or "legacy"; throws ConfigError otherwise.
PathProfile path_profile(std::string_view name);

struct Workload {
  std::uint64_t frame_bytes = 0;
  std::uint64_t action_bytes = 0;
  double inference_us = 0.0;
  // > 0 adds a sampling-phase offset uniform over one frame period at this
  // rate; 0 leaves acquisition out of the total.
  double acquisition_rate_hz = 0.0;
};

struct StageTimings {
  double acquisition_us = 0.0;
  double transfer_us = 0.0;
  double subsample_us = 0.0;
  double inference_us = 0.0;
  double action_transfer_us = 0.0;
  double action_us = 0.0;
  double total_us = 0.0;  // sum of the stages

  double stage_sum() const {
    return acquisition_us + transfer_us + subsample_us + inference_us + action_transfer_us + action_us;
  }
};

// Draws one set of stage durations.
StageTimings draw_stages(const PathProfile& path, const Workload& workload, Rng& rng);

struct PipelineStats {
  std::string path;
  SummaryStats acquisition, transfer, subsample, inference, action_transfer, action, total;
  SummaryStats end_to_end;  // measured on the virtual clock
  double max_decomposition_error_us = 0.0;
  std::vector<StageTimings> runs;
};

// Discrete-event simulation of n_runs independent events flowing through the
// path on an integer-nanosecond virtual clock. Throws InvalidArgument for
// n_runs == 0.
PipelineStats run_pipeline(const PathProfile& path, const Workload& workload, std::size_t n_runs,
                           std::uint64_t seed);

// Throws TooFewSamples for fewer than two samples.
SummaryStats jitter_stats(std::span<const double> samples);

struct BudgetVerdict {
  bool pass = false;
  double total_us = 0.0;
  double budget_us = kLatencyBudgetUs;
  double headroom_us = 0.0;  // budget - total; negative on failure
};

BudgetVerdict latency_budget_check(double total_us, double budget_us = kLatencyBudgetUs);
BudgetVerdict latency_budget_check(const StageTimings& timings, double budget_us = kLatencyBudgetUs);

struct DepthRow {
  int depth = 0;
  double inference_us = 0.0;
  double total_mean_us = 0.0;
  bool within_budget = true;
};

struct DepthSweep {
  std::vector<DepthRow> rows;
  std::optional<int> first_exceeding;  // smallest depth over budget
};

// Square dense layers of `layer_width` on the device of the path (host CPU
// for host paths, fingertip accelerator otherwise).
DepthSweep mlp_depth_sweep(const PathProfile& path, int layer_width, std::span<const int> depths,
                           bool hw_accel, std::size_t runs = 1000, std::uint64_t seed = 1,
                           double budget_us = kLatencyBudgetUs);

// Star topology: every fingertip links to the host, the host to the
// manipulator; on-device processing links fingertips to the manipulator.
struct Topology {
  enum class Node { kFingertip, kHost, kManipulator };
  struct Hop {
    Node from;
    Node to;
    unsigned fingertip = 0;
    const LinkProfile* link = nullptr;
  };

  unsigned fingertips = 4;
  LinkProfile uplink;      // fingertip -> host
  LinkProfile downlink;    // host -> manipulator
  LinkProfile direct;      // fingertip -> manipulator

  static Topology star(unsigned fingertips, const PathProfile& host, const PathProfile& device);
  // Throws InvalidArgument for an unknown fingertip.
  std::vector<Hop> route(unsigned fingertip, PathKind kind) const;
};

// ------------------------------------------------------- wall-clock mode ----

template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  // Blocks while full. Returns false once the queue is closed.
  bool push(T value) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
    return true;
  }

  // Blocks while empty; nullopt after close() once drained.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return v;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mutex_;
  std::condition_variable not_empty_, not_full_;
};

struct WallclockConfig {
  std::size_t items = 1000;
  std::size_t queue_capacity = 8;
  int frame_side = 120;
  int subsample_side = 30;
  std::vector<int> mlp_layers = {64, 64, 3};  // input size is set from the subsampled frame
  std::uint64_t seed = 1;
};

// Real elapsed time of this library's own pipeline (producer -> subsample ->
// MLP inference -> sink threads). Never mixed with simulated numbers.
struct WallclockReport {
  SummaryStats subsample_us, inference_us, end_to_end_us;
  std::size_t items = 0;
  double throughput_hz = 0.0;
};

WallclockReport run_wallclock_pipeline(const WallclockConfig& config = {});

}  // namespace tactile::link
