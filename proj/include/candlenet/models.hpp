#pragma once

#include "candlenet/market_data.hpp"
#include "candlenet/nnet/network.hpp"
#include "candlenet/nnet/train.hpp"
#include "candlenet/patterns.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace candlenet {

enum class ModelKind { mlp, tech_mlp, cnn1, cnn2, cnn3, ensemble, knn };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

// Filter width m of a cnn kind; nullopt otherwise.
std::optional<std::size_t> cnn_width(ModelKind kind);
ModelKind cnn_kind(std::size_t m);
bool is_network_kind(ModelKind kind);
// The three cnn members of the ensemble, in order of filter width.
inline constexpr std::array<ModelKind, 3> kEnsembleMembers = {ModelKind::cnn1, ModelKind::cnn2,
                                                              ModelKind::cnn3};

struct ModelOptions {
  std::size_t window_length = kDefaultWindowLength;
  std::size_t hidden_units = 64;
  std::size_t filters = 8;
  double dropout = 0.5;
  std::size_t tech_length = 1;  // template length for tech-mlp

  void validate() const;
};

// Per-sample input shape: cnn [4, L], mlp [4L], tech-mlp [8].
nnet::Shape model_input_shape(ModelKind kind, const ModelOptions& options = {});
std::vector<nnet::LayerSpec> model_layers(ModelKind kind, const ModelOptions& options = {});

// Freshly initialized network for mlp, tech-mlp or cnn-m. Ensemble and knn are
// not single networks and raise ParameterError.
nnet::Network build_model(ModelKind kind, std::uint64_t seed, const ModelOptions& options = {});

// Standardized windows as network inputs: cnn [N, 4, L]; mlp [N, 4L] (the same
// row-major values flattened).
nnet::Dataset to_dataset(const WindowSet& windows, ModelKind kind);

// ---------------------------------------------------------------------------
// Technical filter features
// ---------------------------------------------------------------------------

struct TechFilterBank {
  std::size_t length = 0;
  std::vector<Template> templates;  // kTemplatesPerLength, all of `length`

  static TechFilterBank builtin(std::size_t m);
  void validate() const;
};

struct TechFeatureRow {
  Date date;  // anchor: last bar of the m-bar window
  std::array<double, kTemplatesPerLength> channels{};
};

struct SymbolFeatures {
  std::string symbol;
  std::vector<TechFeatureRow> rows;

  const TechFeatureRow* find(Date date) const;
};

struct TechFeatureMap {
  std::size_t length = 0;
  std::vector<SymbolFeatures> series;
  std::size_t dropped = 0;  // leading days with fewer than m bars of history

  const TechFeatureRow* find(std::string_view symbol, Date date) const;
};

// Channel j at day n is similarity(template j, m-bar window ending at n), the
// same score the matcher produces.
TechFeatureMap technical_feature_map(const PricePanel& panel, const TechFilterBank& bank);

// One 8-vector per window anchor. Windows whose anchor has no feature row are
// skipped and counted in `missing`.
nnet::Dataset technical_dataset(const TechFeatureMap& features, const WindowSet& windows,
                                std::size_t* missing = nullptr);

// ---------------------------------------------------------------------------
// Predictions, thresholding, ensembling
// ---------------------------------------------------------------------------

struct ProbPair {
  double negative = 0.5;
  double positive = 0.5;

  double confidence() const { return std::max(negative, positive); }
  // Exact ties go to the negative class.
  ReturnClass argmax() const {
    return positive > negative ? ReturnClass::positive : ReturnClass::negative;
  }
};

struct PredictionKey {
  std::string symbol;
  Date date;

  friend auto operator<=>(const PredictionKey&, const PredictionKey&) = default;
  friend bool operator==(const PredictionKey&, const PredictionKey&) = default;
};

// Model outputs on a test set, aligned by (symbol, anchor date).
struct PredictionSet {
  std::string model;
  std::vector<PredictionKey> keys;
  std::vector<ProbPair> probs;
  std::vector<ReturnClass> labels;
  std::vector<double> next_returns;

  std::size_t size() const { return keys.size(); }
};

std::vector<ProbPair> to_prob_pairs(const nnet::Tensor& probs);
PredictionSet make_predictions(std::string model, const WindowSet& windows,
                               const nnet::Tensor& probs);

struct ThresholdedPoint {
  ProbPair probs;
  double confidence = 0.5;
  bool decided = false;
  ReturnClass cls = ReturnClass::negative;  // meaningful only when decided
};

struct ThresholdedPrediction {
  double alpha = 0.5;
  std::vector<ThresholdedPoint> points;

  std::size_t decided_count() const;
  double retention() const;
  // Accuracy over decided points; nullopt when none are decided.
  std::optional<double> accuracy(std::span<const ReturnClass> labels) const;
};

// Decided iff max(p_neg, p_pos) >= alpha. alpha must lie in [0.5, 1].
ThresholdedPrediction apply_threshold(std::span<const ProbPair> probs, double alpha);

struct ThresholdSelection {
  double alpha = 0.5;
  double retain = 0.01;
  std::size_t target = 0;   // ceil(retain · N)
  std::size_t decided = 0;  // points with confidence >= alpha
  double achieved_retention = 0.0;
  std::vector<std::string> warnings;
};

// alpha = the ceil(retain · N)-th largest confidence. With retain · N < 1 the
// single most confident point is kept; ties at alpha can keep more points than
// targeted, which is reported as a warning.
ThresholdSelection select_threshold(std::span<const double> confidences, double retain);

std::vector<double> confidences(std::span<const ProbPair> probs);

struct SweepRow {
  double alpha = 0.5;
  std::size_t decided = 0;
  double retention = 0.0;
  std::optional<double> accuracy;
};

// alpha = 0.500, 0.505, ..., 0.990.
inline constexpr std::size_t kSweepSteps = 99;
double sweep_alpha(std::size_t i);
std::vector<SweepRow> threshold_sweep(std::span<const ProbPair> probs,
                                      std::span<const ReturnClass> labels);

// Elementwise mean of equally long probability sequences.
std::vector<ProbPair> ensemble_proba(std::span<const std::vector<ProbPair>> members);
// Mean of member prediction sets after checking they cover identical keys in
// identical order. Throws ParameterError on misalignment.
PredictionSet ensemble_predictions(std::span<const PredictionSet> members,
                                   std::string name = "ensemble");

// ---------------------------------------------------------------------------
// k-nearest neighbours
// ---------------------------------------------------------------------------

struct KnnResult {
  std::vector<ReturnClass> classes;
  std::vector<double> positive_share;  // fraction of positive neighbours
  std::size_t ties = 0;                // votes split evenly, sent to positive
};

// Euclidean distance over the flattened 4×L windows. Equal distances are
// ordered by training index.
KnnResult knn_predict(const WindowSet& train, const WindowSet& test, std::size_t k);

}  // namespace candlenet
