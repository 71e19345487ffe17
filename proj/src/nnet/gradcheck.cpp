#include "candlenet/nnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace candlenet::nnet {

namespace {

// Sign pattern of every ReLU input in the last forward pass.
std::vector<bool> relu_pattern(const Network& net, const Tensor& batch) {
  std::vector<bool> out;
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    if (net.layer(i).spec().kind != LayerKind::relu) continue;
    const Tensor& in = i == 0 ? batch : net.activation(i - 1);
    for (double v : in.values()) out.push_back(v > 0.0);
  }
  return out;
}

}  // namespace

GradCheckResult gradient_check(Network& net, const Tensor& batch,
                               std::span<const ReturnClass> labels, double step) {
  net.set_masks_frozen(false);
  net.forward(batch, Mode::train);
  net.set_masks_frozen(true);
  net.backward(labels);
  const auto base_pattern = relu_pattern(net, batch);

  std::vector<Tensor> analytic;
  for (auto* p : net.parameters()) analytic.push_back(p->grad);

  auto loss_at = [&](std::vector<bool>& pattern) {
    const Tensor& probs = net.forward(batch, Mode::train);
    const double loss = cross_entropy(probs, labels);
    pattern = relu_pattern(net, batch);
    return loss;
  };

  GradCheckResult result;
  std::vector<bool> plus_pattern, minus_pattern;
  const auto params = net.parameters();
  const auto labels_of = net.parameter_labels();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + step;
      const double up = loss_at(plus_pattern);
      p.value[i] = saved - step;
      const double down = loss_at(minus_pattern);
      p.value[i] = saved;
      if (plus_pattern != base_pattern || minus_pattern != base_pattern) {
        ++result.skipped_kinks;
        continue;
      }
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      const double err = std::abs(a - numeric) / denom;
      ++result.checked;
      if (err > result.max_relative_error || result.worst_parameter.empty()) {
        result.max_relative_error = std::max(err, result.max_relative_error);
        result.worst_parameter = labels_of[k] + "[" + std::to_string(i) + "]";
      }
    }
  }
  net.set_masks_frozen(false);
  return result;
}

}  // namespace candlenet::nnet
