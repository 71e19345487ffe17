#include "candlenet/nnet/train.hpp"

#include "candlenet/error.hpp"
#include "candlenet/hash.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace candlenet::nnet {

namespace {

constexpr std::uint64_t kShuffleStream = 0x9e6c63d0676a9a99ULL;

struct OptimizerState {
  std::vector<Tensor> first;
  std::vector<Tensor> second;
  std::size_t steps = 0;
};

void step(const std::vector<Parameter*>& params, OptimizerState& state, const TrainConfig& cfg) {
  if (state.first.empty()) {
    for (auto* p : params) {
      state.first.emplace_back(p->value.shape());
      if (cfg.optimizer == OptimizerKind::adam) state.second.emplace_back(p->value.shape());
    }
  }
  ++state.steps;
  const double lr = cfg.learning_rate;
  for (std::size_t k = 0; k < params.size(); ++k) {
    double* w = params[k]->value.data();
    const double* g = params[k]->grad.data();
    const std::size_t n = params[k]->value.size();
    switch (cfg.optimizer) {
      case OptimizerKind::sgd:
        for (std::size_t i = 0; i < n; ++i) w[i] -= lr * g[i];
        break;
      case OptimizerKind::sgd_momentum: {
        double* v = state.first[k].data();
        for (std::size_t i = 0; i < n; ++i) {
          v[i] = cfg.momentum * v[i] - lr * g[i];
          w[i] += v[i];
        }
        break;
      }
      case OptimizerKind::adam: {
        double* m = state.first[k].data();
        double* v = state.second[k].data();
        const double t = static_cast<double>(state.steps);
        const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
        const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
        for (std::size_t i = 0; i < n; ++i) {
          m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
          v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
          w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adam_epsilon);
        }
        break;
      }
    }
  }
}

// Fisher-Yates with a plain modulo draw so the order does not depend on the
// standard library's distribution implementation.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::sgd_momentum: return "sgd-momentum";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "sgd-momentum" || text == "sgd_momentum" || text == "momentum") {
    return OptimizerKind::sgd_momentum;
  }
  if (text == "adam") return OptimizerKind::adam;
  throw ParameterError("unknown optimizer '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (batch_size < 1) throw ParameterError("batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("learning rate must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterError("momentum must be in [0, 1)");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ParameterError("adam betas must be in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ParameterError("adam epsilon must be positive");
}

std::string TrainConfig::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "epochs=" << epochs << " batch=" << batch_size << " lr=" << learning_rate
     << " optimizer=" << to_string(optimizer);
  if (optimizer == OptimizerKind::sgd_momentum) os << " momentum=" << momentum;
  if (optimizer == OptimizerKind::adam) {
    os << " beta1=" << adam_beta1 << " beta2=" << adam_beta2 << " eps=" << adam_epsilon;
  }
  os << " seed=" << seed << " shuffle=" << (shuffle ? 1 : 0);
  return os.str();
}

std::vector<EpochMetrics> train(Network& net, const Dataset& data, const TrainConfig& config,
                                const Dataset* eval, const EpochCallback& on_epoch) {
  config.validate();
  if (data.empty()) throw EmptyInputError("training set is empty");
  if (data.inputs.batch() != data.size()) throw ShapeError("input and label counts differ");

  std::mt19937_64 order_rng(mix64(config.seed ^ kShuffleStream));
  net.reseed_dropout(config.seed);
  net.set_masks_frozen(false);

  const std::size_t n = data.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto params = net.parameters();
  OptimizerState opt;
  std::vector<EpochMetrics> history;
  std::vector<ReturnClass> batch_labels;

  for (std::size_t e = 0; e < config.epochs; ++e) {
    if (config.shuffle) shuffle_indices(idx, order_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    try {
      for (std::size_t start = 0; start < n; start += config.batch_size) {
        const std::size_t stop = std::min(n, start + config.batch_size);
        std::span<const std::size_t> rows(idx.data() + start, stop - start);
        const Tensor batch = data.inputs.gather(rows);
        batch_labels.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) batch_labels[i] = data.labels[rows[i]];

        const Tensor& probs = net.forward(batch, Mode::train);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const auto predicted = probs[2 * i + 1] > probs[2 * i] ? ReturnClass::positive
                                                                 : ReturnClass::negative;
          correct += predicted == batch_labels[i];
        }
        const auto result = net.backward(batch_labels);
        loss_sum += result.loss * static_cast<double>(rows.size());
        step(params, opt, config);
      }
    } catch (const NumericError& err) {
      throw NumericError("training diverged in epoch " + std::to_string(e + 1) + ": " + err.what(),
                         e);
    }
    EpochMetrics m;
    m.epoch = e + 1;
    m.loss = loss_sum / static_cast<double>(n);
    if (!std::isfinite(m.loss)) {
      throw NumericError("training diverged in epoch " + std::to_string(e + 1) + ": loss is NaN", e);
    }
    m.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (eval != nullptr && !eval->empty()) m.eval_accuracy = evaluate_accuracy(net, *eval);
    history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return history;
}

Tensor predict_proba(const Network& net, const Tensor& inputs, std::size_t chunk) {
  const std::size_t n = inputs.batch();
  Tensor out({n, 2});
  if (n == 0) return out;
  chunk = std::max<std::size_t>(chunk, 1);
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t stop = std::min(n, start + chunk);
    rows.resize(stop - start);
    std::iota(rows.begin(), rows.end(), start);
    const Tensor p = net.predict_proba(inputs.gather(rows));
    std::copy(p.values().begin(), p.values().end(), out.data() + 2 * start);
  }
  return out;
}

std::vector<ReturnClass> argmax_classes(const Tensor& probs) {
  std::vector<ReturnClass> out(probs.batch());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = probs[2 * i + 1] > probs[2 * i] ? ReturnClass::positive : ReturnClass::negative;
  }
  return out;
}

double evaluate_accuracy(const Network& net, const Dataset& data) {
  if (data.empty()) return 0.0;
  const auto predicted = argmax_classes(predict_proba(net, data.inputs));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == data.labels[i];
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace candlenet::nnet
