#pragma once

#include "candlenet/nnet/network.hpp"

#include <span>
#include <string>

namespace candlenet::nnet {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
  // Coordinates whose +-step perturbation flipped a ReLU unit; the loss is not
  // differentiable there and central differences say nothing.
  std::size_t skipped_kinks = 0;
};

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckFloor = 1e-6;

// Compares backprop gradients of the mean cross-entropy with central
// differences, one parameter coordinate at a time, with the dropout masks of a
// single train-mode pass frozen. Relative error is |a - n| / max(|a|, |n|,
// floor). Parameters are restored afterwards.
GradCheckResult gradient_check(Network& net, const Tensor& batch,
                               std::span<const ReturnClass> labels,
                               double step = kGradCheckStep);

}  // namespace candlenet::nnet
