#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "tactile/error.hpp"
#include "tactile/link.hpp"

using namespace tactile;
using namespace tactile::link;

namespace {

LinkProfile plain_link(double base_us) { return {"plain", kDefaultBandwidthBytesPerS, base_us, {}}; }

// Stage-by-stage sum of a profile with its jitter collapsed onto the means.
double mean_sum(const PathProfile& p, const Workload& w) {
  return p.data_link.mean_us(w.frame_bytes) + p.subsample.mean_us() + w.inference_us +
         p.action_link.mean_us(w.action_bytes) + p.action.mean_us();
}

}  // namespace

TEST(Transfer, ZeroBytesCostsTheBaseLatency) {
  Rng rng(1);
  EXPECT_DOUBLE_EQ(simulate_transfer(plain_link(37.0), 0, rng), 37.0);
}

TEST(Transfer, FullFrameAtDefaultBandwidth) {
  Rng rng(1);
  // 640 x 480 x 3 bytes over 148 MB/s.
  EXPECT_NEAR(simulate_transfer(plain_link(0.0), 921'600, rng), 6227.0, 0.5);
}

TEST(Transfer, JitteredMeanMatchesModel) {
  LinkProfile l = plain_link(100.0);
  l.jitter = LogNormalJitter::from_moments(50.0, 40.0);
  Rng rng(4);
  double sum = 0.0;
  const int n = 10'000;
  for (int i = 0; i < n; ++i) sum += simulate_transfer(l, 4096, rng);
  EXPECT_NEAR(sum / n, l.mean_us(4096), 0.02 * l.mean_us(4096));
}

TEST(Transfer, NonDecreasingInPayload) {
  const LinkProfile l = plain_link(10.0);
  double prev = -1.0;
  for (std::uint64_t bytes = 0; bytes < 2'000'000; bytes += 12'345) {
    Rng rng(2);
    const double t = simulate_transfer(l, bytes, rng);
    EXPECT_GE(t, prev);
    prev = t;
  }
}

TEST(Jitter, MomentsRoundTrip) {
  const auto j = LogNormalJitter::from_moments(120.0, 60.0);
  EXPECT_NEAR(j.mean_us(), 120.0, 1e-9);
  EXPECT_DOUBLE_EQ(LogNormalJitter::none().mean_us(), 0.0);
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) EXPECT_GT(j.draw(rng), 0.0);
}

TEST(Pipeline, NoJitterTotalsAreExactStageSums) {
  const Workload w{0, 0, 0.0, 0.0};
  const auto host = run_pipeline(PathProfile::host().without_jitter(), w, 1, 7);
  const auto dev = run_pipeline(PathProfile::on_device().without_jitter(), w, 1, 7);
  EXPECT_DOUBLE_EQ(host.total.mean, 1450.0 + 150.0 + 5.0 + 1.0 + 450.0 + 80.0 + 850.0 + 160.0);
  EXPECT_DOUBLE_EQ(dev.total.mean, 230.0 + 18.0 + 385.0 + 8.0 + 37.0 + 3.0 + 1.5 + 0.5);
  EXPECT_DOUBLE_EQ(host.total.mean, mean_sum(PathProfile::host(), w));
}

TEST(Pipeline, VirtualClockMatchesStageSum) {
  const auto st = run_pipeline(PathProfile::host(), Workload{1000, 16, 40.0, 1000.0}, 2000, 3);
  EXPECT_LE(st.max_decomposition_error_us, 1.0);
  for (const auto& r : st.runs) EXPECT_NEAR(r.total_us, r.stage_sum(), 1e-9);
  EXPECT_NEAR(st.end_to_end.mean, st.total.mean, 1.0);
}

TEST(Pipeline, JitteredMeanTracksModelMean) {
  const Workload w{0, 0, 0.0, 0.0};
  for (const auto& p : {PathProfile::host(), PathProfile::on_device(), PathProfile::legacy_host()}) {
    const auto st = run_pipeline(p, w, 20'000, 11);
    EXPECT_NEAR(st.total.mean, mean_sum(p, w), 0.01 * mean_sum(p, w)) << p.name;
    EXPECT_GT(st.total.std, 0.0);
  }
}

TEST(Pipeline, DeterministicPerSeed) {
  const auto a = run_pipeline(PathProfile::host(), {}, 500, 9);
  const auto b = run_pipeline(PathProfile::host(), {}, 500, 9);
  EXPECT_EQ(a.total.mean, b.total.mean);
  EXPECT_EQ(a.total.p99, b.total.p99);
  EXPECT_NE(run_pipeline(PathProfile::host(), {}, 500, 10).total.mean, a.total.mean);
  EXPECT_THROW(run_pipeline(PathProfile::host(), {}, 0, 9), Error);
}

TEST(Pipeline, DeviceFasterAtEveryPercentile) {
  const auto host = run_pipeline(PathProfile::host(), {}, 10'000, 1);
  const auto dev = run_pipeline(PathProfile::on_device(), {}, 10'000, 1);
  EXPECT_LT(dev.total.p50, host.total.p50);
  EXPECT_LT(dev.total.p95, host.total.p95);
  EXPECT_LT(dev.total.p99, host.total.p99);
  EXPECT_LT(dev.total.max, host.total.min);
}

TEST(JitterStats, KnownSample) {
  const double xs[] = {1, 2, 3, 4, 5};
  const auto s = jitter_stats(xs);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_NEAR(s.std, std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(s.p50, 3.0);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 5.0);
  const double one[] = {4};
  try {
    jitter_stats(one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTooFewSamples);
  }
}

TEST(Budget, DeviceWithInferencePassesHostFails) {
  const auto dev = run_pipeline(PathProfile::on_device().without_jitter(), {0, 0, 500.0, 0.0}, 1, 1);
  const auto v = latency_budget_check(dev.total.mean);
  EXPECT_TRUE(v.pass);
  EXPECT_DOUBLE_EQ(v.total_us, 1183.0);
  EXPECT_DOUBLE_EQ(v.headroom_us, kLatencyBudgetUs - 1183.0);
  const auto host = run_pipeline(PathProfile::host().without_jitter(), {}, 1, 1);
  EXPECT_FALSE(latency_budget_check(host.total.mean).pass);
  EXPECT_LT(latency_budget_check(host.total.mean).headroom_us, 0.0);
}

TEST(Budget, BoundaryIsInclusive) {
  EXPECT_TRUE(latency_budget_check(2463.0).pass);
  EXPECT_FALSE(latency_budget_check(2463.0001).pass);
  StageTimings t;
  t.transfer_us = 2000.0;
  t.action_us = 463.0;
  t.total_us = t.stage_sum();
  EXPECT_TRUE(latency_budget_check(t).pass);
}

TEST(DepthSweep, ZeroDepthAddsNoInference) {
  const int depths[] = {0, 1, 2, 4, 8, 12};
  const auto p = PathProfile::on_device().without_jitter();
  const auto s = mlp_depth_sweep(p, 256, depths, false, 10, 1);
  ASSERT_EQ(s.rows.size(), 6u);
  EXPECT_DOUBLE_EQ(s.rows[0].inference_us, 0.0);
  EXPECT_DOUBLE_EQ(s.rows[0].total_mean_us, mean_sum(p, {}));
  for (std::size_t i = 1; i < s.rows.size(); ++i) {
    EXPECT_GT(s.rows[i].inference_us, s.rows[i - 1].inference_us);
    EXPECT_GT(s.rows[i].total_mean_us, s.rows[i - 1].total_mean_us);
    EXPECT_DOUBLE_EQ(s.rows[i].inference_us, depths[i] * nn::dense_layer_us(256, 256, nn::fingertip_device()));
  }
  ASSERT_TRUE(s.first_exceeding.has_value());
  EXPECT_TRUE(s.rows[0].within_budget);
  for (const auto& r : s.rows) EXPECT_EQ(r.within_budget, r.depth < *s.first_exceeding);
}

TEST(DepthSweep, AcceleratorAdmitsDeeperNetworks) {
  const int depths[] = {1, 2, 4, 8, 16, 32, 64};
  const auto p = PathProfile::on_device().without_jitter();
  const auto plain = mlp_depth_sweep(p, 256, depths, false, 10, 1);
  const auto accel = mlp_depth_sweep(p, 256, depths, true, 10, 1);
  ASSERT_TRUE(plain.first_exceeding.has_value());
  EXPECT_TRUE(!accel.first_exceeding || *accel.first_exceeding > *plain.first_exceeding);
}

TEST(Topology, Routes) {
  const auto t = Topology::star(4, PathProfile::host(), PathProfile::on_device());
  const auto host = t.route(2, PathKind::kHost);
  ASSERT_EQ(host.size(), 2u);
  EXPECT_EQ(host[0].from, Topology::Node::kFingertip);
  EXPECT_EQ(host[0].to, Topology::Node::kHost);
  EXPECT_EQ(host[1].to, Topology::Node::kManipulator);
  EXPECT_EQ(host[0].fingertip, 2u);
  const auto dev = t.route(0, PathKind::kOnDevice);
  ASSERT_EQ(dev.size(), 1u);
  EXPECT_EQ(dev[0].to, Topology::Node::kManipulator);
  EXPECT_THROW(t.route(4, PathKind::kHost), Error);
}

TEST(BoundedQueue, PreservesOrderAcrossThreads) {
  BoundedQueue<int> q(3);
  std::thread producer([&] {
    for (int i = 0; i < 1000; ++i) ASSERT_TRUE(q.push(i));
    q.close();
  });
  int expected = 0;
  while (auto v = q.pop()) EXPECT_EQ(*v, expected++);
  producer.join();
  EXPECT_EQ(expected, 1000);
  EXPECT_FALSE(q.push(5));
}

TEST(Wallclock, ProcessesEveryItem) {
  WallclockConfig cfg;
  cfg.items = 200;
  const auto r = run_wallclock_pipeline(cfg);
  EXPECT_EQ(r.items, 200u);
  EXPECT_GT(r.throughput_hz, 0.0);
  EXPECT_GT(r.end_to_end_us.mean, 0.0);
  EXPECT_GE(r.end_to_end_us.mean, r.inference_us.mean);
}

TEST(Paths, NamesResolve) {
  EXPECT_EQ(path_profile("host").kind, PathKind::kHost);
  EXPECT_EQ(path_profile("device").kind, PathKind::kOnDevice);
  EXPECT_EQ(path_profile("legacy").kind, PathKind::kLegacyHost);
  try {
    path_profile("carrier-pigeon");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kConfigError);
  }
}
