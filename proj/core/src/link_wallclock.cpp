#include <chrono>
#include <thread>

#include "tactile/error.hpp"
#include "tactile/link.hpp"

namespace tactile::link {

namespace {

using Clock = std::chrono::steady_clock;

double micros(Clock::duration d) { return std::chrono::duration<double, std::micro>(d).count(); }

struct Item {
  Clock::time_point born;
  std::vector<std::uint8_t> frame;
  nn::Vector features;
  double subsample_us = 0.0;
  double inference_us = 0.0;
};

}  // namespace

WallclockReport run_wallclock_pipeline(const WallclockConfig& config) {
  if (config.items == 0) throw Error(Errc::kInvalidArgument, "need at least one item");
  if (config.subsample_side < 1 || config.frame_side < config.subsample_side)
    throw Error(Errc::kInvalidArgument, "subsample side must lie in [1, frame side]");

  const int side = config.frame_side, sub = config.subsample_side, step = side / sub;
  nn::MlpSpec spec;
  spec.layer_sizes = {sub * sub};
  spec.layer_sizes.insert(spec.layer_sizes.end(), config.mlp_layers.begin(), config.mlp_layers.end());
  const nn::MlpModel model = nn::MlpModel::random(spec, config.seed);

  BoundedQueue<Item> raw(config.queue_capacity), reduced(config.queue_capacity),
      inferred(config.queue_capacity);

  std::thread producer([&] {
    Rng rng = make_rng(config.seed, 1);
    std::uniform_int_distribution<int> px(0, 255);
    for (std::size_t i = 0; i < config.items; ++i) {
      Item it;
      it.frame.resize(static_cast<std::size_t>(side) * side);
      for (auto& p : it.frame) p = static_cast<std::uint8_t>(px(rng));
      it.born = Clock::now();
      if (!raw.push(std::move(it))) break;
    }
    raw.close();
  });

  std::thread subsampler([&] {
    while (auto it = raw.pop()) {
      const auto t0 = Clock::now();
      it->features.resize(sub * sub);
      for (int y = 0; y < sub; ++y) {
        for (int x = 0; x < sub; ++x) {
          double acc = 0.0;
          for (int dy = 0; dy < step; ++dy) {
            for (int dx = 0; dx < step; ++dx)
              acc += it->frame[static_cast<std::size_t>((y * step + dy) * side + x * step + dx)];
          }
          it->features(y * sub + x) = acc / (step * step * 255.0);
        }
      }
      it->subsample_us = micros(Clock::now() - t0);
      reduced.push(std::move(*it));
    }
    reduced.close();
  });

  std::thread inference([&] {
    while (auto it = reduced.pop()) {
      const auto t0 = Clock::now();
      const nn::Vector y = model.forward(it->features);
      it->inference_us = micros(Clock::now() - t0);
      it->features = y;
      inferred.push(std::move(*it));
    }
    inferred.close();
  });

  std::vector<double> sub_us, inf_us, e2e_us;
  const auto start = Clock::now();
  while (auto it = inferred.pop()) {
    e2e_us.push_back(micros(Clock::now() - it->born));
    sub_us.push_back(it->subsample_us);
    inf_us.push_back(it->inference_us);
  }
  const double elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  producer.join();
  subsampler.join();
  inference.join();

  WallclockReport r;
  r.items = e2e_us.size();
  r.subsample_us = summarize(sub_us);
  r.inference_us = summarize(inf_us);
  r.end_to_end_us = summarize(e2e_us);
  r.throughput_hz = elapsed_s > 0.0 ? static_cast<double>(r.items) / elapsed_s : 0.0;
  return r;
}

}  // namespace tactile::link
