#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace candlenet::nnet {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles. For batched data the first dimension is
// the sample index.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  void fill(double v);
  void reshape(Shape shape);
  // Reallocates only when the element count changes.
  void resize(const Shape& shape);

  // Batch helpers: dim(0) is the sample count.
  std::size_t batch() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t sample_size() const;
  std::span<const double> sample(std::size_t n) const;
  std::span<double> sample(std::size_t n);
  Tensor gather(std::span<const std::size_t> rows) const;

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace candlenet::nnet
