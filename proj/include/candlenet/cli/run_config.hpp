#pragma once

#include "candlenet/market_data.hpp"
#include "candlenet/models.hpp"
#include "candlenet/nnet/train.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace candlenet::cli {

// Everything a command needs. Filled from the command line and an optional
// flat key = value file; command-line values win.
struct RunConfig {
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // Data: a CSV panel, or a synthetic panel from the synth-* settings.
  std::string data_path;
  std::string synth_path;
  SyntheticSpec synth;
  bool synth_requested = false;

  // Split. Explicit ranges override the chronological train fraction.
  std::string train_start, train_end, test_start, test_end;
  double train_fraction = 0.8;
  std::size_t window_length = kDefaultWindowLength;

  std::vector<ModelKind> models = {ModelKind::cnn1, ModelKind::cnn2, ModelKind::cnn3,
                                   ModelKind::ensemble};
  ModelOptions model_options;
  nnet::TrainConfig train;
  bool eval_each_epoch = true;
  double retain = 0.01;
  double validation_fraction = 0.1;
  bool paper_mode = false;  // pick alpha on test outputs instead of validation
  std::size_t knn_k = 5;

  double centile = 0.01;

  std::vector<double> costs = {0.0, 0.001, 0.0025};
  std::optional<double> years;
  std::string predictions_dir;  // defaults to out_dir
  std::string model_path;

  // Sorted key=value lines of every setting that affects results (output
  // location, config path and thread count excluded).
  std::string canonical() const;
  std::string digest() const;
  const std::string& predictions_location() const {
    return predictions_dir.empty() ? out_dir : predictions_dir;
  }
};

// Raw text of options that need post-processing after parsing.
struct RawOptions {
  std::string models;
  std::string costs;
  std::string optimizer;
  std::string plant;
  std::string run_direction;
  std::string synth_start;
  double years = 0.0;
};

// Registers global options on `app` (config file, seeds, data, split, model,
// training, thresholding and backtest settings).
void add_options(CLI::App& app, RunConfig& config, RawOptions& raw);

// Converts the raw text fields and validates the result. Throws ParameterError.
void finalize(RunConfig& config, const RawOptions& raw);

std::vector<ModelKind> parse_model_list(const std::string& text);
std::vector<double> parse_cost_list(const std::string& text);

}  // namespace candlenet::cli
