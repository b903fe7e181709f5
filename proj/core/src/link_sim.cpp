#include <algorithm>
#include <cmath>
#include <queue>

#include "tactile/error.hpp"
#include "tactile/link.hpp"

namespace tactile::link {

LogNormalJitter LogNormalJitter::from_moments(double mean_us, double std_us) {
  if (mean_us < 0.0 || std_us < 0.0) throw Error(Errc::kInvalidArgument, "jitter moments must be >= 0");
  if (mean_us == 0.0) return none();
  const double s2 = std::log1p((std_us * std_us) / (mean_us * mean_us));
  return {std::log(mean_us) - 0.5 * s2, std::sqrt(s2), true};
}

double LogNormalJitter::mean_us() const {
  return enabled ? std::exp(mu + 0.5 * sigma * sigma) : 0.0;
}

double LogNormalJitter::draw(Rng& rng) const {
  if (!enabled) return 0.0;
  std::normal_distribution<double> unit(0.0, 1.0);
  double z = unit(rng);
  while (std::abs(z) > 5.0) z = unit(rng);
  return std::exp(mu + sigma * z);
}

double LinkProfile::mean_us(std::uint64_t n_bytes) const {
  return static_cast<double>(n_bytes) / bandwidth_bytes_per_s * 1e6 + base_latency_us + jitter.mean_us();
}

double simulate_transfer(const LinkProfile& link, std::uint64_t n_bytes, Rng& rng) {
  if (!(link.bandwidth_bytes_per_s > 0.0)) throw Error(Errc::kInvalidArgument, "bandwidth must be positive");
  return static_cast<double>(n_bytes) / link.bandwidth_bytes_per_s * 1e6 + link.base_latency_us +
         link.jitter.draw(rng);
}

std::string_view path_name(PathKind kind) {
  switch (kind) {
    case PathKind::kHost: return "host";
    case PathKind::kOnDevice: return "device";
    case PathKind::kLegacyHost: return "legacy";
  }
  return "?";
}

namespace {

LinkProfile make_link(std::string name, double base, double jitter_mean, double jitter_std) {
  return {std::move(name), kDefaultBandwidthBytesPerS, base,
          LogNormalJitter::from_moments(jitter_mean, jitter_std)};
}

StageModel make_stage(double base, double jitter_mean, double jitter_std) {
  return {base, LogNormalJitter::from_moments(jitter_mean, jitter_std)};
}

}  // namespace

// Stage means: host 1600 / 6 / 530 / 1010, on-device 248 / 393 / 40 / 2.
PathProfile PathProfile::host() {
  PathProfile p;
  p.kind = PathKind::kHost;
  p.name = "host";
  p.data_link = make_link("usb-host", 1450.0, 150.0, 300.0);
  p.subsample = make_stage(5.0, 1.0, 0.5);
  p.action_link = make_link("host-manipulator", 450.0, 80.0, 120.0);
  p.action = make_stage(850.0, 160.0, 250.0);
  p.acquisition_rate_hz = 1000.0;
  return p;
}

PathProfile PathProfile::on_device() {
  PathProfile p;
  p.kind = PathKind::kOnDevice;
  p.name = "device";
  p.data_link = make_link("sensor-bus", 230.0, 18.0, 12.0);
  p.subsample = make_stage(385.0, 8.0, 5.0);
  p.action_link = make_link("fingertip-manipulator", 37.0, 3.0, 2.0);
  p.action = make_stage(1.5, 0.5, 0.3);
  p.acquisition_rate_hz = 1000.0;
  return p;
}

// Older camera fingertip: 60 fps over USB 2.0 with 4.7 ms of host overhead
// across transfer, subsampling and action transfer.
PathProfile PathProfile::legacy_host() {
  PathProfile p;
  p.kind = PathKind::kLegacyHost;
  p.name = "legacy";
  p.data_link = make_link("usb2-host", 2800.0, 200.0, 400.0);
  p.data_link.bandwidth_bytes_per_s = 35e6;
  p.subsample = make_stage(150.0, 50.0, 60.0);
  p.action_link = make_link("host-manipulator", 1300.0, 200.0, 300.0);
  p.action = make_stage(850.0, 160.0, 250.0);
  p.acquisition_rate_hz = 60.0;
  return p;
}

// Same stage means with every distribution collapsed onto its mean.
PathProfile PathProfile::without_jitter() const {
  PathProfile p = *this;
  p.data_link.base_latency_us += p.data_link.jitter.mean_us();
  p.data_link.jitter = LogNormalJitter::none();
  p.action_link.base_latency_us += p.action_link.jitter.mean_us();
  p.action_link.jitter = LogNormalJitter::none();
  p.subsample = {p.subsample.mean_us(), LogNormalJitter::none()};
  p.action = {p.action.mean_us(), LogNormalJitter::none()};
  return p;
}

PathProfile path_profile(std::string_view name) {
  if (name == "host") return PathProfile::host();
  if (name == "device" || name == "on-device") return PathProfile::on_device();
  if (name == "legacy") return PathProfile::legacy_host();
  throw Error(Errc::kConfigError, "unknown path '" + std::string(name) + "'");
}

StageTimings draw_stages(const PathProfile& path, const Workload& w, Rng& rng) {
  StageTimings t;
  if (w.acquisition_rate_hz > 0.0) {
    std::uniform_real_distribution<double> phase(0.0, 1e6 / w.acquisition_rate_hz);
    t.acquisition_us = phase(rng);
  }
  t.transfer_us = simulate_transfer(path.data_link, w.frame_bytes, rng);
  t.subsample_us = path.subsample.draw(rng);
  t.inference_us = w.inference_us;
  t.action_transfer_us = simulate_transfer(path.action_link, w.action_bytes, rng);
  t.action_us = path.action.draw(rng);
  t.total_us = t.stage_sum();
  return t;
}

PipelineStats run_pipeline(const PathProfile& path, const Workload& workload, std::size_t n_runs,
                           std::uint64_t seed) {
  if (n_runs == 0) throw Error(Errc::kInvalidArgument, "n_runs must be >= 1");
  if (workload.inference_us < 0.0) throw Error(Errc::kInvalidArgument, "negative inference time");

  constexpr int kStages = 6;
  struct Event {
    std::uint64_t t_ns;
    std::uint64_t seq;
    std::size_t run;
    int stage;  // stage about to start; kStages = done
    bool operator>(const Event& o) const { return t_ns != o.t_ns ? t_ns > o.t_ns : seq > o.seq; }
  };
  // Runs arrive one period apart; they share no resources, so the spacing
  // only orders the event queue.
  constexpr std::uint64_t kArrivalSpacingNs = 100'000'000;

  PipelineStats out;
  out.path = path.name;
  out.runs.resize(n_runs);
  std::vector<std::array<std::uint64_t, kStages>> durations(n_runs);
  std::vector<std::uint64_t> arrival(n_runs), finish(n_runs);
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::uint64_t seq = 0;

  Rng rng = make_rng(seed, 0x11A7);
  for (std::size_t r = 0; r < n_runs; ++r) {
    const StageTimings st = draw_stages(path, workload, rng);
    out.runs[r] = st;
    const double us[kStages] = {st.acquisition_us, st.transfer_us, st.subsample_us,
                                st.inference_us, st.action_transfer_us, st.action_us};
    for (int k = 0; k < kStages; ++k) durations[r][static_cast<std::size_t>(k)] = static_cast<std::uint64_t>(std::llround(us[k] * 1e3));
    arrival[r] = r * kArrivalSpacingNs;
    queue.push({arrival[r], seq++, r, 0});
  }
  while (!queue.empty()) {
    const Event ev = queue.top();
    queue.pop();
    if (ev.stage == kStages) {
      finish[ev.run] = ev.t_ns;
      continue;
    }
    queue.push({ev.t_ns + durations[ev.run][static_cast<std::size_t>(ev.stage)], seq++, ev.run, ev.stage + 1});
  }

  std::vector<double> cols[8];
  for (auto& c : cols) c.reserve(n_runs);
  for (std::size_t r = 0; r < n_runs; ++r) {
    const auto& st = out.runs[r];
    const double e2e = static_cast<double>(finish[r] - arrival[r]) * 1e-3;
    out.max_decomposition_error_us = std::max(out.max_decomposition_error_us, std::abs(e2e - st.total_us));
    cols[0].push_back(st.acquisition_us);
    cols[1].push_back(st.transfer_us);
    cols[2].push_back(st.subsample_us);
    cols[3].push_back(st.inference_us);
    cols[4].push_back(st.action_transfer_us);
    cols[5].push_back(st.action_us);
    cols[6].push_back(st.total_us);
    cols[7].push_back(e2e);
  }
  out.acquisition = summarize(cols[0]);
  out.transfer = summarize(cols[1]);
  out.subsample = summarize(cols[2]);
  out.inference = summarize(cols[3]);
  out.action_transfer = summarize(cols[4]);
  out.action = summarize(cols[5]);
  out.total = summarize(cols[6]);
  out.end_to_end = summarize(cols[7]);
  return out;
}

SummaryStats jitter_stats(std::span<const double> samples) {
  if (samples.size() < 2) throw Error(Errc::kTooFewSamples, "jitter needs at least two samples");
  return summarize(samples);
}

BudgetVerdict latency_budget_check(double total_us, double budget_us) {
  return {total_us <= budget_us, total_us, budget_us, budget_us - total_us};
}

BudgetVerdict latency_budget_check(const StageTimings& timings, double budget_us) {
  return latency_budget_check(timings.total_us, budget_us);
}

DepthSweep mlp_depth_sweep(const PathProfile& path, int layer_width, std::span<const int> depths,
                           bool hw_accel, std::size_t runs, std::uint64_t seed, double budget_us) {
  if (depths.empty()) throw Error(Errc::kInvalidArgument, "no depths to sweep");
  if (layer_width < 1) throw Error(Errc::kInvalidArgument, "layer width must be >= 1");
  const nn::DeviceProfile device =
      path.kind == PathKind::kOnDevice
          ? (hw_accel ? nn::fingertip_device_accelerated() : nn::fingertip_device())
          : nn::host_device();
  const double per_layer = nn::dense_layer_us(layer_width, layer_width, device);

  std::vector<int> sorted(depths.begin(), depths.end());
  std::sort(sorted.begin(), sorted.end());
  DepthSweep out;
  for (int d : sorted) {
    if (d < 0) throw Error(Errc::kInvalidArgument, "depth must be >= 0");
    Workload w;
    w.inference_us = per_layer * d;
    const PipelineStats st = run_pipeline(path, w, runs, seed);
    DepthRow row{d, w.inference_us, st.total.mean, false};
    row.within_budget = latency_budget_check(row.total_mean_us, budget_us).pass;
    if (!row.within_budget && !out.first_exceeding) out.first_exceeding = d;
    out.rows.push_back(row);
  }
  return out;
}

Topology Topology::star(unsigned fingertips, const PathProfile& host, const PathProfile& device) {
  Topology t;
  t.fingertips = fingertips;
  t.uplink = host.data_link;
  t.downlink = host.action_link;
  t.direct = device.action_link;
  return t;
}

std::vector<Topology::Hop> Topology::route(unsigned fingertip, PathKind kind) const {
  if (fingertip >= fingertips) throw Error(Errc::kInvalidArgument, "no such fingertip");
  if (kind == PathKind::kOnDevice) return {{Node::kFingertip, Node::kManipulator, fingertip, &direct}};
  return {{Node::kFingertip, Node::kHost, fingertip, &uplink},
          {Node::kHost, Node::kManipulator, fingertip, &downlink}};
}

}  // namespace tactile::link
