#include "candlenet/nnet/network.hpp"

#include "candlenet/error.hpp"
#include "candlenet/hash.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace candlenet::nnet {

namespace {
constexpr std::uint64_t kDropoutStream = 0xd1b54a32d192ed03ULL;
constexpr std::size_t kClasses = 2;
}  // namespace

Network::Network(Shape input_shape, std::vector<LayerSpec> specs, std::uint64_t seed)
    : input_shape_(std::move(input_shape)), specs_(std::move(specs)), seed_(seed) {
  build();
  initialize();
  reseed_dropout(seed_);
}

Network::Network(const Network& other)
    : input_shape_(other.input_shape_),
      specs_(other.specs_),
      seed_(other.seed_),
      states_(other.states_),
      dropout_rng_(other.dropout_rng_) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
  activations_.resize(layers_.size() + 1);
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Network::build() {
  if (specs_.empty() || specs_.back().kind != LayerKind::softmax) {
    throw ShapeError("network must end in a softmax layer");
  }
  Shape shape = input_shape_;
  for (const auto& spec : specs_) {
    layers_.push_back(make_layer(spec, shape));
    shape = layers_.back()->output_shape();
  }
  if (shape != Shape{kClasses}) {
    throw ShapeError("network output must be " + shape_string({kClasses}) + ", got " + shape_string(shape));
  }
  states_.resize(layers_.size());
  activations_.resize(layers_.size() + 1);
}

void Network::initialize() {
  std::mt19937_64 rng(mix64(seed_));
  for (auto& l : layers_) l->initialize(rng);
}

void Network::zero_parameters() {
  for (auto* p : parameters()) p->value.fill(0.0);
}

void Network::reseed_dropout(std::uint64_t seed) { dropout_rng_.seed(mix64(seed ^ kDropoutStream)); }

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    for (auto& p : l->parameters()) out.push_back(&p);
  }
  return out;
}

std::vector<const Parameter*> Network::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& l : layers_) {
    for (const auto& p : std::as_const(*l).parameters()) out.push_back(&p);
  }
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

std::vector<std::string> Network::parameter_labels() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (const auto& p : std::as_const(*layers_[i]).parameters()) {
      out.push_back(std::to_string(i) + "." + std::string(to_string(specs_[i].kind)) + "." + p.name);
    }
  }
  return out;
}

void Network::zero_gradients() {
  for (auto* p : parameters()) p->grad.fill(0.0);
}

const Tensor& Network::forward(const Tensor& batch, Mode mode) {
  Shape per_sample(batch.shape().begin() + (batch.rank() > 0 ? 1 : 0), batch.shape().end());
  if (batch.rank() == 0 || per_sample != input_shape_) {
    throw ShapeError("network expects " + shape_string(input_shape_) + " per sample, got " +
                     shape_string(batch.shape()));
  }
  activations_[0] = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->forward(activations_[i], activations_[i + 1], mode, states_[i], dropout_rng_);
    if (mode == Mode::train && !activations_[i + 1].all_finite()) {
      throw NumericError("non-finite activation in layer " + std::to_string(i) + " (" +
                             std::string(to_string(specs_[i].kind)) + ")",
                         i);
    }
  }
  last_forward_train_ = mode == Mode::train;
  return activations_.back();
}

double cross_entropy(const Tensor& probs, std::span<const ReturnClass> labels) {
  if (probs.batch() != labels.size()) throw ShapeError("label count does not match batch");
  double loss = 0.0;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const double p = probs[s * kClasses + static_cast<std::size_t>(labels[s])];
    loss -= std::log(std::max(p, 1e-300));
  }
  return loss / static_cast<double>(labels.size());
}

BackwardResult Network::backward(std::span<const ReturnClass> labels) {
  if (!last_forward_train_) throw Error("backward requires a preceding train-mode forward");
  const Tensor& probs = activations_.back();
  const std::size_t n = probs.batch();
  BackwardResult out;
  out.loss = cross_entropy(probs, labels);
  if (!std::isfinite(out.loss)) throw NumericError("non-finite loss", layers_.size() - 1);

  // Softmax and cross-entropy fused: dL/dz = (p - onehot) / n.
  out.logit_grad = Tensor(probs.shape());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t c = 0; c < kClasses; ++c) {
      const double target = static_cast<std::size_t>(labels[s]) == c ? 1.0 : 0.0;
      out.logit_grad[s * kClasses + c] = (probs[s * kClasses + c] - target) * inv_n;
    }
  }

  zero_gradients();
  Tensor grad = out.logit_grad;
  Tensor grad_in;
  for (std::size_t i = layers_.size() - 1; i-- > 0;) {
    layers_[i]->backward(activations_[i], activations_[i + 1], grad, i > 0 ? &grad_in : nullptr,
                         states_[i]);
    if (i > 0) std::swap(grad, grad_in);
  }
  return out;
}

Tensor Network::predict_proba(const Tensor& batch) const {
  Shape per_sample(batch.shape().begin() + (batch.rank() > 0 ? 1 : 0), batch.shape().end());
  if (batch.rank() == 0 || per_sample != input_shape_) {
    throw ShapeError("network expects " + shape_string(input_shape_) + " per sample, got " +
                     shape_string(batch.shape()));
  }
  Tensor a = batch, b;
  LayerState scratch;
  std::mt19937_64 unused;
  for (const auto& l : layers_) {
    l->forward(a, b, Mode::predict, scratch, unused);
    std::swap(a, b);
  }
  return a;
}

void Network::set_masks_frozen(bool frozen) {
  for (auto& s : states_) s.frozen = frozen;
}

}  // namespace candlenet::nnet
