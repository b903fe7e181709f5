#include <algorithm>
#include <cmath>
#include <numeric>

#include "tactile/error.hpp"
#include "tactile/nn.hpp"
#include "tactile/rng.hpp"

namespace tactile::nn {

namespace {

void check_dataset(const Dataset& data, const MlpModel& model, Loss loss) {
  if (data.size() == 0) throw Error(Errc::kEmptyDataset, "training set is empty");
  if (data.x.rows() != model.input_size())
    throw Error(Errc::kShapeMismatch, "feature count differs from model input");
  if (loss == Loss::kCrossEntropy) {
    if (data.labels.size() != data.size())
      throw Error(Errc::kShapeMismatch, "one label per sample required");
    for (int y : data.labels) {
      if (y < 0 || y >= model.output_size())
        throw Error(Errc::kLabelOutOfRange, "label " + std::to_string(y) + " out of range");
    }
  } else if (data.targets.cols() != data.x.cols() || data.targets.rows() != model.output_size()) {
    throw Error(Errc::kShapeMismatch, "targets must be outputs x samples");
  }
}

double batch_loss(const MlpModel& model, const Matrix& x, std::span<const int> labels,
                  const Matrix& targets, Loss loss, Matrix* grad, ForwardCache* cache) {
  const Matrix z = model.logits(x, cache);
  if (loss == Loss::kCrossEntropy) return cross_entropy(z, labels, grad);
  return mse(z, targets, grad);
}

}  // namespace

TrainResult train(const Dataset& data, const MlpSpec& spec, const TrainConfig& config) {
  return train(data, MlpModel::random(spec, config.seed), config);
}

TrainResult train(const Dataset& data, MlpModel model, const TrainConfig& config) {
  if (!(config.lr >= 0.0)) throw Error(Errc::kInvalidArgument, "learning rate must be >= 0");
  if (config.max_epochs < 1) throw Error(Errc::kInvalidArgument, "need at least one epoch");
  if (config.loss == Loss::kCrossEntropy && model.spec().head != OutputHead::kSoftmax)
    throw Error(Errc::kInvalidArgument, "cross-entropy needs a softmax head");
  check_dataset(data, model, config.loss);

  const std::size_t n = data.size();
  const std::size_t batch =
      config.batch_size <= 0 ? n : std::min(n, static_cast<std::size_t>(config.batch_size));
  Adam adam(model, {config.lr, config.beta1, config.beta2, config.eps});
  Rng rng = make_rng(config.seed, 0xBA7C4);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::vector<DenseLayer> grads;
  ForwardCache cache;
  Matrix grad;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      Matrix xb(data.x.rows(), static_cast<Eigen::Index>(len));
      std::vector<int> lb;
      Matrix tb;
      if (config.loss == Loss::kMse) tb.resize(data.targets.rows(), static_cast<Eigen::Index>(len));
      for (std::size_t i = 0; i < len; ++i) {
        const auto src = static_cast<Eigen::Index>(order[start + i]);
        xb.col(static_cast<Eigen::Index>(i)) = data.x.col(src);
        if (config.loss == Loss::kCrossEntropy) lb.push_back(data.labels[order[start + i]]);
        else tb.col(static_cast<Eigen::Index>(i)) = data.targets.col(src);
      }
      epoch_loss += batch_loss(model, xb, lb, tb, config.loss, &grad, &cache) *
                    static_cast<double>(len);
      model.backward(cache, grad, grads);
      adam.step(model, grads);
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(n));
  }
  result.model = std::move(model);
  return result;
}

std::vector<int> predict(const MlpModel& model, const Matrix& x) {
  const Matrix z = model.logits(x);
  std::vector<int> out(static_cast<std::size_t>(z.cols()));
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    Eigen::Index arg = 0;
    z.col(c).maxCoeff(&arg);
    out[static_cast<std::size_t>(c)] = static_cast<int>(arg);
  }
  return out;
}

double accuracy(const MlpModel& model, const Dataset& data) {
  if (data.size() == 0) throw Error(Errc::kEmptyDataset, "evaluation set is empty");
  const auto pred = predict(model, data.x);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == data.labels[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

namespace {

// Sign pattern of every hidden pre-activation; a change means the finite
// difference straddles a ReLU kink.
std::vector<bool> relu_pattern(const MlpModel& model, const ForwardCache& cache) {
  std::vector<bool> out;
  if (model.spec().hidden != Activation::kReLU) return out;
  for (std::size_t k = 0; k + 1 < cache.pre.size(); ++k) {
    for (Eigen::Index i = 0; i < cache.pre[k].size(); ++i) out.push_back(cache.pre[k](i) > 0.0);
  }
  return out;
}

template <typename LossFn>
GradCheck run_grad_check(const MlpModel& model, const Vector& x, LossFn loss_fn, double h) {
  ForwardCache cache;
  Matrix grad_logits;
  loss_fn(model, Matrix(x), &grad_logits, &cache);
  std::vector<DenseLayer> grads;
  model.backward(cache, grad_logits, grads);
  const auto base_pattern = relu_pattern(model, cache);

  MlpModel probe = model;
  GradCheck out;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    ForwardCache c_plus, c_minus;
    param = saved + h;
    const double f_plus = loss_fn(probe, Matrix(x), nullptr, &c_plus);
    const bool kink_plus = relu_pattern(probe, c_plus) != base_pattern;
    param = saved - h;
    const double f_minus = loss_fn(probe, Matrix(x), nullptr, &c_minus);
    const bool kink_minus = relu_pattern(probe, c_minus) != base_pattern;
    param = saved;
    if (kink_plus || kink_minus) {
      ++out.excluded;
      return;
    }
    const double numeric = (f_plus - f_minus) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic - numeric) / denom);
    ++out.checked;
  };

  auto& layers = probe.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    for (Eigen::Index i = 0; i < layers[k].weight.size(); ++i) {
      check(layers[k].weight.data()[i], grads[k].weight.data()[i]);
    }
    for (Eigen::Index i = 0; i < layers[k].bias.size(); ++i) {
      check(layers[k].bias.data()[i], grads[k].bias.data()[i]);
    }
  }
  return out;
}

}  // namespace

GradCheck grad_check(const MlpModel& model, const Vector& x, int label, double h) {
  const int labels[1] = {label};
  return run_grad_check(
      model, x,
      [&](const MlpModel& m, const Matrix& xm, Matrix* g, ForwardCache* c) {
        return cross_entropy(m.logits(xm, c), labels, g);
      },
      h);
}

GradCheck grad_check(const MlpModel& model, const Vector& x, const Vector& target, double h) {
  const Matrix t = target;
  return run_grad_check(
      model, x,
      [&](const MlpModel& m, const Matrix& xm, Matrix* g, ForwardCache* c) {
        return mse(m.logits(xm, c), t, g);
      },
      h);
}

}  // namespace tactile::nn
