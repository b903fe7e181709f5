#include <cmath>

#include "tactile/error.hpp"
#include "tactile/nn.hpp"

namespace tactile::nn {

double ConvCost::est_latency_us(const DeviceProfile& device) const {
  if (!(device.macs_per_us > 0.0)) throw Error(Errc::kInvalidArgument, "device throughput must be positive");
  return static_cast<double>(macs) / device.macs_per_us +
         static_cast<double>(layer_macs.size()) * device.per_layer_overhead_us;
}

ConvCost conv_cost(const ConvCostSpec& spec) {
  if (spec.input_h < 1 || spec.input_w < 1 || spec.input_channels < 1)
    throw Error(Errc::kShapeUnderflow, "input must be at least 1x1x1");
  ConvCost cost;
  int h = spec.input_h, w = spec.input_w, c = spec.input_channels;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    if (l.kernel < 1 || l.stride < 1) throw Error(Errc::kInvalidArgument, "kernel and stride must be >= 1");
    int oh, ow;
    if (l.padding == Padding::kSame) {
      oh = (h + l.stride - 1) / l.stride;
      ow = (w + l.stride - 1) / l.stride;
    } else {
      oh = h >= l.kernel ? (h - l.kernel) / l.stride + 1 : 0;
      ow = w >= l.kernel ? (w - l.kernel) / l.stride + 1 : 0;
    }
    if (oh < 1 || ow < 1)
      throw Error(Errc::kShapeUnderflow, "layer " + std::to_string(i) + " reduces the map below 1x1");
    const int oc = l.kind == ConvKind::kDepthwise ? c : l.out_channels;
    if (oc < 1) throw Error(Errc::kInvalidArgument, "output channels must be >= 1");
    const auto k2 = static_cast<std::uint64_t>(l.kernel) * static_cast<std::uint64_t>(l.kernel);
    const auto spatial = static_cast<std::uint64_t>(oh) * static_cast<std::uint64_t>(ow);
    const std::uint64_t macs = l.kind == ConvKind::kDepthwise
                                   ? spatial * k2 * static_cast<std::uint64_t>(c)
                                   : spatial * k2 * static_cast<std::uint64_t>(c) *
                                         static_cast<std::uint64_t>(oc);
    cost.layer_macs.push_back(macs);
    cost.macs += macs;
    h = oh;
    w = ow;
    c = oc;
  }
  cost.out_h = h;
  cost.out_w = w;
  cost.out_c = c;
  return cost;
}

ConvCostSpec mobilenet_v2(int input_size, double width_multiplier) {
  auto ch = [&](int base) {
    return std::max(8, static_cast<int>(std::lround(base * width_multiplier / 8.0)) * 8);
  };
  ConvCostSpec spec;
  spec.input_h = spec.input_w = input_size;
  spec.input_channels = 3;
  auto& L = spec.layers;
  L.push_back({ConvKind::kStandard, ch(32), 3, 2, Padding::kSame});
  int in_c = ch(32);
  // expansion t, output c, repeats n, first stride s
  const int table[7][4] = {{1, 16, 1, 1}, {6, 24, 2, 2},  {6, 32, 3, 2}, {6, 64, 4, 2},
                           {6, 96, 3, 1}, {6, 160, 3, 2}, {6, 320, 1, 1}};
  for (const auto& row : table) {
    const int t = row[0], out_c = ch(row[1]), n = row[2], s = row[3];
    for (int r = 0; r < n; ++r) {
      const int stride = r == 0 ? s : 1;
      const int hidden = in_c * t;
      if (t != 1) L.push_back({ConvKind::kStandard, hidden, 1, 1, Padding::kSame});
      L.push_back({ConvKind::kDepthwise, 0, 3, stride, Padding::kSame});
      L.push_back({ConvKind::kStandard, out_c, 1, 1, Padding::kSame});
      in_c = out_c;
    }
  }
  L.push_back({ConvKind::kStandard, width_multiplier > 1.0 ? ch(1280) : 1280, 1, 1, Padding::kSame});
  return spec;
}

// Throughputs are calibrated so that a 256-wide dense layer costs 190 us on
// the accelerator with its engine off, 23.75 us with it on.
DeviceProfile fingertip_device() { return {"fingertip", 409.6, 30.0}; }

DeviceProfile fingertip_device_accelerated(double factor) {
  const DeviceProfile base = fingertip_device();
  return {"fingertip-accel", base.macs_per_us * factor, base.per_layer_overhead_us / factor};
}

DeviceProfile host_device() { return {"host", 20'000.0, 2.0}; }

double dense_layer_us(int in, int out, const DeviceProfile& device) {
  if (!(device.macs_per_us > 0.0)) throw Error(Errc::kInvalidArgument, "device throughput must be positive");
  return static_cast<double>(in) * static_cast<double>(out) / device.macs_per_us +
         device.per_layer_overhead_us;
}

}  // namespace tactile::nn
