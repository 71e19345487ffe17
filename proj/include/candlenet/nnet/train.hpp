#pragma once

#include "candlenet/market_data.hpp"
#include "candlenet/nnet/network.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace candlenet::nnet {

enum class OptimizerKind { sgd, sgd_momentum, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double learning_rate = 1e-2;
  OptimizerKind optimizer = OptimizerKind::sgd_momentum;
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;  // data order and dropout masks
  bool shuffle = true;

  void validate() const;
  // One-line key=value rendering, used in model metadata and digests.
  std::string describe() const;
};

struct Dataset {
  Tensor inputs;  // [N, ...per-sample shape]
  std::vector<ReturnClass> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean over the epoch's samples, train mode
  double train_accuracy = 0.0;  // running train-mode accuracy over the epoch
  std::optional<double> eval_accuracy;  // predict mode, when an eval set is given
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Minibatch gradient descent for exactly config.epochs epochs. Divergence
// raises NumericError carrying the 0-based epoch index.
std::vector<EpochMetrics> train(Network& net, const Dataset& data, const TrainConfig& config,
                                const Dataset* eval = nullptr, const EpochCallback& on_epoch = {});

// Predict-mode probabilities [N, 2], evaluated in chunks.
Tensor predict_proba(const Network& net, const Tensor& inputs, std::size_t chunk = 1024);

std::vector<ReturnClass> argmax_classes(const Tensor& probs);
double evaluate_accuracy(const Network& net, const Dataset& data);

}  // namespace candlenet::nnet
