#pragma once

#include "candlenet/cli/artifacts.hpp"
#include "candlenet/cli/run_config.hpp"
#include "candlenet/market_data.hpp"
#include "candlenet/models.hpp"
#include "candlenet/nnet/network.hpp"
#include "candlenet/nnet/serialize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace candlenet::cli {

// Parses arguments, runs the command and maps failures onto exit codes:
// 0 success, 1 usage error, 2 data error, 3 numeric failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

// Panel from --data, or a synthetic panel when --synth or any synth-* setting
// is given.
PricePanel load_panel(const RunConfig& config);

struct PreparedData {
  PricePanel panel;
  ReturnSeries returns;
  SplitConfig split;
  WindowSet fit;         // training windows minus the validation tail
  WindowSet validation;  // tail of the training range (empty in paper mode)
  WindowSet test;
};

PreparedData prepare_data(const RunConfig& config, PricePanel panel);

struct TrainedModel {
  ModelKind kind = ModelKind::cnn1;
  std::uint64_t seed = 0;
  PredictionRows rows;
  ThresholdSelection selection;
  std::vector<nnet::EpochMetrics> epochs;
  std::optional<nnet::Network> network;
  nnet::ModelMeta meta;
};

// Trains every requested model (ensemble members included) and thresholds
// their outputs. Order follows the request, members before the ensemble.
std::vector<TrainedModel> train_models(const RunConfig& config, const PreparedData& data);

// Seed of one model derived from the master seed and the model name.
std::uint64_t model_seed(std::uint64_t master, ModelKind kind);

// alpha from validation confidences, or test confidences in paper mode (and
// when no validation slice exists, with a warning).
ThresholdSelection choose_alpha(const RunConfig& config, const PredictionSet& validation,
                                const PredictionSet& test);

void cmd_ingest(const RunConfig& config);
void cmd_synth(const RunConfig& config);
void cmd_eval_patterns(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_sweep(const RunConfig& config);
void cmd_ensemble(const RunConfig& config);
void cmd_backtest(const RunConfig& config);
void cmd_significance(const RunConfig& config);
void cmd_export_filters(const RunConfig& config);

}  // namespace candlenet::cli
