#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "tactile/error.hpp"
#include "tactile/nn.hpp"
#include "tactile/rng.hpp"

namespace tactile::nn {

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw Error(Errc::kInvalidArgument, "an MLP needs at least 2 layers");
  for (int s : layer_sizes) {
    if (s < 1) throw Error(Errc::kInvalidArgument, "layer sizes must be >= 1");
  }
}

MlpModel::MlpModel(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  for (std::size_t i = 0; i + 1 < spec_.layer_sizes.size(); ++i) {
    layers_.push_back({Matrix::Zero(spec_.layer_sizes[i + 1], spec_.layer_sizes[i]),
                       Vector::Zero(spec_.layer_sizes[i + 1])});
  }
}

MlpModel MlpModel::random(const MlpSpec& spec, std::uint64_t seed) {
  MlpModel m(spec);
  Rng rng(mix_seed(seed));
  for (auto& layer : m.layers_) {
    const double fan_in = static_cast<double>(layer.weight.cols());
    const double fan_out = static_cast<double>(layer.weight.rows());
    const double limit = spec.hidden == Activation::kReLU ? std::sqrt(6.0 / fan_in)
                                                          : std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    // Column-major fill keeps the draw order fixed across Eigen versions.
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = u(rng);
    }
  }
  return m;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Matrix MlpModel::logits(const Matrix& x, ForwardCache* cache) const {
  if (x.rows() != input_size())
    throw Error(Errc::kShapeMismatch, "input has " + std::to_string(x.rows()) +
                                          " features, model expects " +
                                          std::to_string(input_size()));
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix a = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    Matrix z = l.weight * a;
    z.colwise() += l.bias;
    if (cache) {
      cache->inputs.push_back(a);
      cache->pre.push_back(z);
    }
    if (i + 1 == layers_.size()) return z;
    a = spec_.hidden == Activation::kReLU ? Matrix(z.cwiseMax(0.0)) : Matrix(z.array().tanh());
  }
  return a;
}

Matrix MlpModel::forward(const Matrix& x) const {
  Matrix z = logits(x);
  return spec_.head == OutputHead::kSoftmax ? softmax_columns(z) : z;
}

Vector MlpModel::forward(const Vector& x) const { return forward(Matrix(x)).col(0); }

Matrix MlpModel::backward(const ForwardCache& cache, const Matrix& grad_logits,
                          std::vector<DenseLayer>& grads) const {
  grads.resize(layers_.size());
  Matrix delta = grad_logits;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    grads[k].weight = delta * cache.inputs[k].transpose();
    grads[k].bias = delta.rowwise().sum();
    Matrix back = layers_[k].weight.transpose() * delta;
    if (k == 0) return back;
    const Matrix& z = cache.pre[k - 1];
    if (spec_.hidden == Activation::kReLU) {
      delta = back.array() * (z.array() > 0.0).cast<double>();
    } else {
      delta = back.array() * (1.0 - z.array().tanh().square());
    }
  }
  return delta;
}

bool MlpModel::same_parameters(const MlpModel& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  auto same = [](const auto& a, const auto& b) {
    return a.size() == b.size() && a.rows() == b.rows() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
  };
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!same(layers_[i].weight, other.layers_[i].weight) || !same(layers_[i].bias, other.layers_[i].bias))
      return false;
  }
  return true;
}

Matrix softmax_columns(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const double m = z.col(c).maxCoeff();
    const Vector e = (z.col(c).array() - m).exp();
    out.col(c) = e / e.sum();
  }
  return out;
}

Vector softmax(const Vector& z) { return softmax_columns(Matrix(z)).col(0); }

double cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad) {
  const auto n = logits.cols();
  if (static_cast<std::size_t>(n) != labels.size())
    throw Error(Errc::kShapeMismatch, "label count differs from batch size");
  const Matrix p = softmax_columns(logits);
  double loss = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    const int y = labels[static_cast<std::size_t>(c)];
    if (y < 0 || y >= logits.rows()) throw Error(Errc::kLabelOutOfRange, "label out of range");
    // log-softmax computed stably from the logits
    const double m = logits.col(c).maxCoeff();
    const double lse = m + std::log((logits.col(c).array() - m).exp().sum());
    loss += lse - logits(y, c);
  }
  if (grad) {
    *grad = p;
    for (Eigen::Index c = 0; c < n; ++c) (*grad)(labels[static_cast<std::size_t>(c)], c) -= 1.0;
    *grad /= static_cast<double>(n);
  }
  return loss / static_cast<double>(n);
}

double mse(const Matrix& outputs, const Matrix& targets, Matrix* grad) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
    throw Error(Errc::kShapeMismatch, "target shape differs from output shape");
  const Matrix diff = outputs - targets;
  const double n = static_cast<double>(outputs.cols());
  if (grad) *grad = diff / n;
  return 0.5 * diff.squaredNorm() / n;
}

Adam::Adam(const MlpModel& model, AdamConfig config) : cfg_(config) {
  for (const auto& l : model.layers()) {
    m_.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  }
  v_ = m_;
}

void Adam::step(MlpModel& model, const std::vector<DenseLayer>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    param.array() -= cfg_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.eps);
  };
  auto& layers = model.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, m_[i].weight, v_[i].weight, grads[i].weight);
    update(layers[i].bias, m_[i].bias, v_[i].bias, grads[i].bias);
  }
}

}  // namespace tactile::nn
