#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tactile/core_model.hpp"

namespace tactile::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { kReLU, kTanh };
enum class OutputHead { kSoftmax, kLinear };
enum class Loss { kCrossEntropy, kMse };

struct MlpSpec {
  std::vector<int> layer_sizes;  // input, hidden..., output
  Activation hidden = Activation::kReLU;
  OutputHead head = OutputHead::kSoftmax;

  void validate() const;  // throws InvalidArgument
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;
};

// Activations kept by a forward pass for back-propagation.
struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
};

class MlpModel {
 public:
  MlpModel() = default;
  // All-zero parameters.
  explicit MlpModel(MlpSpec spec);
  // He-uniform (ReLU) or Xavier-uniform (tanh) initialization.
  static MlpModel random(const MlpSpec& spec, std::uint64_t seed);

  const MlpSpec& spec() const { return spec_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  int input_size() const { return spec_.layer_sizes.front(); }
  int output_size() const { return spec_.layer_sizes.back(); }
  std::size_t parameter_count() const;

  // Columns of X are samples. Returns head outputs (probabilities for a
  // softmax head). Throws ShapeMismatch on a wrong input size.
  Matrix forward(const Matrix& x) const;
  Vector forward(const Vector& x) const;
  // Pre-head outputs, filling `cache` for backward().
  Matrix logits(const Matrix& x, ForwardCache* cache = nullptr) const;
  // Back-propagates dL/dlogits through the network. `grads` receives one
  // entry per layer; returns dL/dX.
  Matrix backward(const ForwardCache& cache, const Matrix& grad_logits,
                  std::vector<DenseLayer>& grads) const;

  // Bitwise parameter equality.
  bool same_parameters(const MlpModel& other) const;

 private:
  MlpSpec spec_;
  std::vector<DenseLayer> layers_;
};

Matrix softmax_columns(const Matrix& z);
Vector softmax(const Vector& z);

// Mean loss over the batch columns; writes dL/dlogits when `grad` is set.
// Cross-entropy expects a softmax head and integer labels; MSE uses
// 0.5 * ||y - t||^2 against `targets`.
double cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad = nullptr);
double mse(const Matrix& outputs, const Matrix& targets, Matrix* grad = nullptr);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const MlpModel& model, AdamConfig config);
  void step(MlpModel& model, const std::vector<DenseLayer>& grads);

 private:
  AdamConfig cfg_;
  std::vector<DenseLayer> m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int max_epochs = 100;
  int batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 1;
  Loss loss = Loss::kCrossEntropy;
};

// Columns of `x` are samples. Cross-entropy training reads `labels`; MSE
// training reads `targets` (outputs x samples).
struct Dataset {
  Matrix x;
  std::vector<int> labels;
  Matrix targets;

  std::size_t size() const { return static_cast<std::size_t>(x.cols()); }
};

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_curve;  // mean training loss per epoch
};

TrainResult train(const Dataset& data, const MlpSpec& spec, const TrainConfig& config);
// Continues from an existing model.
TrainResult train(const Dataset& data, MlpModel model, const TrainConfig& config);

std::vector<int> predict(const MlpModel& model, const Matrix& x);
double accuracy(const MlpModel& model, const Dataset& data);

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;  // coordinates whose perturbation crossed a ReLU kink
};

GradCheck grad_check(const MlpModel& model, const Vector& x, int label, double h = 1e-5);
GradCheck grad_check(const MlpModel& model, const Vector& x, const Vector& target,
                     double h = 1e-5);

// --- analytic compute-cost model ---

enum class ConvKind { kStandard, kDepthwise };
enum class Padding { kSame, kValid };

struct ConvLayerSpec {
  ConvKind kind = ConvKind::kStandard;
  int out_channels = 0;  // ignored for depthwise
  int kernel = 3;
  int stride = 1;
  Padding padding = Padding::kSame;
};

struct ConvCostSpec {
  int input_h = 64;
  int input_w = 64;
  int input_channels = 3;
  std::vector<ConvLayerSpec> layers;
};

struct DeviceProfile {
  std::string name;
  double macs_per_us = 1.0;
  double per_layer_overhead_us = 0.0;
};

struct ConvCost {
  std::uint64_t macs = 0;
  std::vector<std::uint64_t> layer_macs;
  int out_h = 0, out_w = 0, out_c = 0;

  double est_latency_us(const DeviceProfile& device) const;
};

// Throws ShapeUnderflow if a layer would shrink the feature map below 1x1.
ConvCost conv_cost(const ConvCostSpec& spec);
// MobileNetV2 feature extractor (inverted residual stack, 1x1 head).
ConvCostSpec mobilenet_v2(int input_size = 64, double width_multiplier = 1.0);

// Fingertip accelerator with the hardware engine off, and the same part
// with it on; the host CPU for the other path.
DeviceProfile fingertip_device();
DeviceProfile fingertip_device_accelerated(double factor = 8.0);
DeviceProfile host_device();

// Cost of one dense layer of the given widths on a device.
double dense_layer_us(int in, int out, const DeviceProfile& device);

// --- weight serialization ---

// "D36W" | u16 version | u8 hidden activation | u8 head | u32 layers |
// per layer: u32 rows | u32 cols | rows*cols f64 (row-major) | rows f64 bias
inline constexpr std::uint16_t kWeightsVersion = 1;
std::vector<std::uint8_t> serialize(const MlpModel& model);
MlpModel deserialize(std::span<const std::uint8_t> bytes);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace tactile::nn
