#include "candlenet/cli/run_config.hpp"

#include "candlenet/error.hpp"
#include "candlenet/hash.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

namespace candlenet::cli {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_date(const std::string& text, const char* what) {
  if (!text.empty() && !Date::parse(text)) {
    throw ParameterError(std::string(what) + ": expected YYYY-MM-DD, got '" + text + "'");
  }
}

}  // namespace

std::vector<ModelKind> parse_model_list(const std::string& text) {
  std::vector<ModelKind> out;
  for (const auto& item : split_list(text)) {
    const ModelKind k = parse_model_kind(item);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  if (out.empty()) throw ParameterError("model list is empty");
  return out;
}

std::vector<double> parse_cost_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || !(v >= 0.0)) {
      throw ParameterError("bad cost '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ParameterError("cost list is empty");
  return out;
}

void add_options(CLI::App& app, RunConfig& c, RawOptions& raw) {
  app.set_config("--config", "", "Flat key = value settings file; flags override it");
  app.add_option("--out", c.out_dir, "Output directory");
  app.add_option("--seed", c.seed, "Master seed (label noise, initialization, data order)");
  app.add_option("--threads", c.threads, "Worker threads for independent models");

  app.add_option("--data", c.data_path, "OHLC CSV panel (date,symbol,open,high,low,close)");
  app.add_option("--synth", c.synth_path, "Synthetic panel spec file (key = value)");
  app.add_option("--synth-symbols", c.synth.symbols, "Synthetic symbol count");
  app.add_option("--synth-length", c.synth.length, "Synthetic bars per symbol");
  app.add_option("--synth-volatility", c.synth.volatility, "Daily log-return volatility");
  app.add_option("--synth-start", raw.synth_start, "First synthetic date");
  app.add_option("--synth-plant", raw.plant, "Planted signal: none, run, body_reversal, scaled_reversal");
  app.add_option("--synth-drift", c.synth.plant.drift, "Planted drift: log return, or the body coefficient for scaled_reversal");
  app.add_option("--synth-run-length", c.synth.plant.run_length, "Run length for the run plant");
  app.add_option("--synth-run-direction", raw.run_direction, "Run direction: up or down");

  app.add_option("--train-start", c.train_start, "First training date");
  app.add_option("--train-end", c.train_end, "Last training date");
  app.add_option("--test-start", c.test_start, "First test date");
  app.add_option("--test-end", c.test_end, "Last test date");
  app.add_option("--train-fraction", c.train_fraction,
                 "Chronological share of dates used for training when no ranges are given");
  app.add_option("--window", c.window_length, "Window length in days");

  app.add_option("--models", raw.models,
                 "Comma-separated: mlp, tech-mlp, cnn-1, cnn-2, cnn-3, ensemble, knn");
  app.add_option("--tech-length", c.model_options.tech_length, "Template length for tech-mlp");
  app.add_option("--dropout", c.model_options.dropout, "Dropout rate");
  app.add_option("--epochs", c.train.epochs, "Training epochs");
  app.add_option("--batch", c.train.batch_size, "Minibatch size");
  app.add_option("--learning-rate", c.train.learning_rate, "Learning rate");
  app.add_option("--optimizer", raw.optimizer, "sgd, sgd-momentum or adam");
  app.add_option("--momentum", c.train.momentum, "Momentum for sgd-momentum");
  app.add_option("--shuffle", c.train.shuffle, "Shuffle training data each epoch (true/false)");
  app.add_option("--eval-each-epoch", c.eval_each_epoch,
                 "Record test accuracy after every epoch (true/false)");
  app.add_option("--retain", c.retain, "Share of most confident outputs kept by the threshold");
  app.add_option("--validation-fraction", c.validation_fraction,
                 "Tail of the training dates held out to choose the threshold");
  app.add_flag("--paper-mode", c.paper_mode, "Choose the threshold on test outputs");
  app.add_option("--knn-k", c.knn_k, "Neighbours for the knn baseline");

  app.add_option("--centile", c.centile, "Top share of similarity scores counted as matches");

  app.add_option("--costs", raw.costs, "Comma-separated per-trade costs (fractions)");
  app.add_option("--years", raw.years, "Years for CAGR (default: test calendar span)");
  app.add_option("--predictions", c.predictions_dir, "Directory holding prediction files");
  app.add_option("--model", c.model_path, "Model file for export-filters");
}

void finalize(RunConfig& c, const RawOptions& raw) {
  if (!raw.models.empty()) c.models = parse_model_list(raw.models);
  if (!raw.costs.empty()) c.costs = parse_cost_list(raw.costs);
  if (!raw.optimizer.empty()) c.train.optimizer = nnet::parse_optimizer(raw.optimizer);
  if (!raw.plant.empty()) apply_synthetic_setting(c.synth, "plant", raw.plant);
  if (!raw.run_direction.empty()) apply_synthetic_setting(c.synth, "run_direction", raw.run_direction);
  if (!raw.synth_start.empty()) apply_synthetic_setting(c.synth, "start_date", raw.synth_start);
  if (raw.years != 0.0) {
    if (!(raw.years > 0.0)) throw ParameterError("years must be positive");
    c.years = raw.years;
  }
  c.synth.seed = c.seed;
  c.model_options.window_length = c.window_length;

  check_date(c.train_start, "train-start");
  check_date(c.train_end, "train-end");
  check_date(c.test_start, "test-start");
  check_date(c.test_end, "test-end");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
    throw ParameterError("train-fraction must be in (0, 1)");
  }
  if (!(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0)) {
    throw ParameterError("validation-fraction must be in [0, 1)");
  }
  if (!(c.retain > 0.0 && c.retain < 1.0)) throw ParameterError("retain must be in (0, 1)");
  if (!(c.centile > 0.0 && c.centile <= 1.0)) throw ParameterError("centile must be in (0, 1]");
  if (c.knn_k < 1) throw ParameterError("knn-k must be >= 1");
  if (c.threads < 1) c.threads = 1;
  c.train.validate();
  c.model_options.validate();
  c.synth.validate();
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["command"] = command;
  kv["seed"] = std::to_string(seed);
  kv["data"] = data_path;
  kv["synth"] = synth_path;
  kv["synth.symbols"] = std::to_string(synth.symbols);
  kv["synth.length"] = std::to_string(synth.length);
  kv["synth.volatility"] = fmt(synth.volatility);
  kv["synth.start"] = synth.start_date.iso();
  kv["synth.plant"] = std::to_string(static_cast<int>(synth.plant.kind));
  kv["synth.drift"] = fmt(synth.plant.drift);
  kv["synth.run_length"] = std::to_string(synth.plant.run_length);
  kv["synth.run_direction"] = std::to_string(synth.plant.run_direction);
  kv["train_start"] = train_start;
  kv["train_end"] = train_end;
  kv["test_start"] = test_start;
  kv["test_end"] = test_end;
  kv["train_fraction"] = fmt(train_fraction);
  kv["window"] = std::to_string(window_length);
  std::string models_text;
  for (auto m : models) models_text += std::string(models_text.empty() ? "" : ",") + std::string(to_string(m));
  kv["models"] = models_text;
  kv["tech_length"] = std::to_string(model_options.tech_length);
  kv["dropout"] = fmt(model_options.dropout);
  kv["train"] = train.describe();
  kv["eval_each_epoch"] = eval_each_epoch ? "1" : "0";
  kv["retain"] = fmt(retain);
  kv["validation_fraction"] = fmt(validation_fraction);
  kv["paper_mode"] = paper_mode ? "1" : "0";
  kv["knn_k"] = std::to_string(knn_k);
  kv["centile"] = fmt(centile);
  std::string costs_text;
  for (double v : costs) costs_text += std::string(costs_text.empty() ? "" : ",") + fmt(v);
  kv["costs"] = costs_text;
  kv["years"] = years ? fmt(*years) : "";
  kv["model"] = model_path;
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::digest() const { return hex64(fnv1a(canonical())); }

}  // namespace candlenet::cli
