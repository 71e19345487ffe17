#include "candlenet/nnet/tensor.hpp"

#include "candlenet/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace candlenet::nnet {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "×";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("tensor " + shape_string(shape_) + " given " + std::to_string(data_.size()) +
                     " values");
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::reshape(Shape shape) {
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  shape_ = std::move(shape);
}

void Tensor::resize(const Shape& shape) {
  shape_ = shape;
  data_.resize(shape_size(shape_));
}

std::size_t Tensor::sample_size() const {
  return shape_.empty() || shape_[0] == 0 ? 0 : data_.size() / shape_[0];
}

std::span<const double> Tensor::sample(std::size_t n) const {
  const std::size_t k = sample_size();
  return std::span<const double>(data_).subspan(n * k, k);
}

std::span<double> Tensor::sample(std::size_t n) {
  const std::size_t k = sample_size();
  return std::span<double>(data_).subspan(n * k, k);
}

Tensor Tensor::gather(std::span<const std::size_t> rows) const {
  Shape s = shape_;
  s[0] = rows.size();
  Tensor out(s);
  const std::size_t k = sample_size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(rows[i] * k), k,
                out.data_.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  return out;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace candlenet::nnet
