#pragma once

#include "candlenet/market_data.hpp"
#include "candlenet/nnet/layers.hpp"
#include "candlenet/nnet/tensor.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace candlenet::nnet {

struct BackwardResult {
  double loss = 0.0;
  Tensor logit_grad;  // dL/d(softmax input), [batch, classes]
};

// Ordered stack of layers ending in a softmax over two classes. Holds the
// activations and dropout masks of the most recent forward pass so backward
// can reuse them.
class Network {
 public:
  Network(Shape input_shape, std::vector<LayerSpec> specs, std::uint64_t seed);
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;
  ~Network() = default;

  const Shape& input_shape() const { return input_shape_; }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  std::size_t layer_count() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }
  std::uint64_t seed() const { return seed_; }

  // Fan-in uniform weights and zero biases, drawn from the construction seed.
  void initialize();
  void zero_parameters();
  void reseed_dropout(std::uint64_t seed);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;
  // "<layer index>.<kind>.<name>" for each entry of parameters().
  std::vector<std::string> parameter_labels() const;
  void zero_gradients();

  // Class probabilities [batch, 2]. Train mode draws fresh dropout masks
  // unless masks are frozen, and checks every activation for finiteness.
  const Tensor& forward(const Tensor& batch, Mode mode);
  // Mean categorical cross-entropy of the last forward pass; fills parameter
  // gradients. Requires the last forward to be in train mode.
  BackwardResult backward(std::span<const ReturnClass> labels);

  // Predict mode without touching the cached state.
  Tensor predict_proba(const Tensor& batch) const;

  // Reuse the current dropout masks on the next train-mode forwards.
  void set_masks_frozen(bool frozen);

  // Output of layer i from the last forward pass.
  const Tensor& activation(std::size_t i) const { return activations_.at(i + 1); }

 private:
  void build();

  Shape input_shape_;
  std::vector<LayerSpec> specs_;
  std::uint64_t seed_ = 0;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<LayerState> states_;
  std::vector<Tensor> activations_;
  std::mt19937_64 dropout_rng_;
  bool last_forward_train_ = false;
};

double cross_entropy(const Tensor& probs, std::span<const ReturnClass> labels);

}  // namespace candlenet::nnet
