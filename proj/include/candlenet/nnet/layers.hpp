#pragma once

#include "candlenet/nnet/tensor.hpp"

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace candlenet::nnet {

enum class LayerKind { dense, conv, relu, dropout, flatten, softmax };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view text);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t units = 0;    // dense
  std::size_t filters = 0;  // conv
  std::size_t width = 0;    // conv filter width (days)
  double rate = 0.0;        // dropout

  static LayerSpec dense(std::size_t units) { return {LayerKind::dense, units, 0, 0, 0.0}; }
  static LayerSpec conv(std::size_t filters, std::size_t width) {
    return {LayerKind::conv, 0, filters, width, 0.0};
  }
  static LayerSpec relu() { return {LayerKind::relu}; }
  static LayerSpec dropout(double rate) { return {LayerKind::dropout, 0, 0, 0, rate}; }
  static LayerSpec flatten() { return {LayerKind::flatten}; }
  static LayerSpec softmax() { return {LayerKind::softmax}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

enum class Mode { train, predict };

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Per-layer scratch owned by the network: the dropout mask of the last train
// pass, and whether that mask is frozen for reuse.
struct LayerState {
  Tensor mask;
  bool frozen = false;
};

// A differentiable layer. Shapes are per sample; tensors passed to forward and
// backward carry a leading batch dimension.
class Layer {
 public:
  explicit Layer(Shape input_shape) : input_shape_(std::move(input_shape)) {}
  virtual ~Layer() = default;

  virtual LayerSpec spec() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }

  virtual void forward(const Tensor& in, Tensor& out, Mode mode, LayerState& state,
                       std::mt19937_64& rng) const = 0;
  // Accumulates parameter gradients; writes dL/din when grad_in is non-null.
  virtual void backward(const Tensor& in, const Tensor& out, const Tensor& grad_out,
                        Tensor* grad_in, const LayerState& state) = 0;

  virtual std::span<Parameter> parameters() { return {}; }
  virtual std::span<const Parameter> parameters() const { return {}; }
  virtual void initialize(std::mt19937_64& /*rng*/) {}

 protected:
  Shape input_shape_;
  Shape output_shape_;
};

// Throws ShapeError when `input_shape` does not suit the layer kind.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& input_shape);

}  // namespace candlenet::nnet
