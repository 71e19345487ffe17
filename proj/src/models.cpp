#include "candlenet/models.hpp"

#include "candlenet/error.hpp"
#include "candlenet/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

namespace candlenet {

using nnet::LayerSpec;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::tech_mlp: return "tech-mlp";
    case ModelKind::cnn1: return "cnn-1";
    case ModelKind::cnn2: return "cnn-2";
    case ModelKind::cnn3: return "cnn-3";
    case ModelKind::ensemble: return "ensemble";
    case ModelKind::knn: return "knn";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::mlp, ModelKind::tech_mlp, ModelKind::cnn1, ModelKind::cnn2,
                 ModelKind::cnn3, ModelKind::ensemble, ModelKind::knn}) {
    if (text == to_string(k)) return k;
  }
  throw ParameterError("unknown model kind '" + std::string(text) + "'");
}

std::optional<std::size_t> cnn_width(ModelKind kind) {
  switch (kind) {
    case ModelKind::cnn1: return 1;
    case ModelKind::cnn2: return 2;
    case ModelKind::cnn3: return 3;
    default: return std::nullopt;
  }
}

ModelKind cnn_kind(std::size_t m) {
  switch (m) {
    case 1: return ModelKind::cnn1;
    case 2: return ModelKind::cnn2;
    case 3: return ModelKind::cnn3;
    default: throw ParameterError("cnn filter width must be 1, 2 or 3, got " + std::to_string(m));
  }
}

bool is_network_kind(ModelKind kind) {
  return kind != ModelKind::ensemble && kind != ModelKind::knn;
}

void ModelOptions::validate() const {
  if (hidden_units == 0 || filters == 0) throw ParameterError("layer sizes must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("dropout rate must be in [0, 1)");
  if (tech_length < 1 || tech_length > 3) throw ParameterError("tech_length must be 1, 2 or 3");
  if (window_length < 3) throw ParameterError("window length must be at least 3");
}

nnet::Shape model_input_shape(ModelKind kind, const ModelOptions& options) {
  switch (kind) {
    case ModelKind::mlp: return {kPriceRows * options.window_length};
    case ModelKind::tech_mlp: return {kTemplatesPerLength};
    case ModelKind::cnn1:
    case ModelKind::cnn2:
    case ModelKind::cnn3: return {kPriceRows, options.window_length};
    default: throw ParameterError(std::string(to_string(kind)) + " is not a network model");
  }
}

std::vector<LayerSpec> model_layers(ModelKind kind, const ModelOptions& options) {
  options.validate();
  std::vector<LayerSpec> layers;
  if (auto m = cnn_width(kind)) {
    if (*m > options.window_length) throw ParameterError("filter wider than the window");
    layers.push_back(LayerSpec::conv(options.filters, *m));
    layers.push_back(LayerSpec::relu());
    layers.push_back(LayerSpec::dropout(options.dropout));
    layers.push_back(LayerSpec::flatten());
  } else if (!is_network_kind(kind)) {
    throw ParameterError(std::string(to_string(kind)) + " is not a network model");
  }
  for (int i = 0; i < 2; ++i) {
    layers.push_back(LayerSpec::dense(options.hidden_units));
    layers.push_back(LayerSpec::relu());
    layers.push_back(LayerSpec::dropout(options.dropout));
  }
  layers.push_back(LayerSpec::dense(2));
  layers.push_back(LayerSpec::softmax());
  return layers;
}

nnet::Network build_model(ModelKind kind, std::uint64_t seed, const ModelOptions& options) {
  return nnet::Network(model_input_shape(kind, options), model_layers(kind, options), seed);
}

nnet::Dataset to_dataset(const WindowSet& windows, ModelKind kind) {
  const std::size_t len = windows.window_length;
  const std::size_t n = windows.size();
  nnet::Dataset out;
  if (cnn_width(kind)) {
    out.inputs = nnet::Tensor({n, kPriceRows, len});
  } else if (kind == ModelKind::mlp || kind == ModelKind::knn) {
    out.inputs = nnet::Tensor({n, kPriceRows * len});
  } else {
    throw ParameterError("raw windows do not feed " + std::string(to_string(kind)));
  }
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& w = windows.windows[i];
    if (w.values.size() != kPriceRows * len) throw ShapeError("window has wrong size");
    std::copy(w.values.begin(), w.values.end(), out.inputs.data() + i * kPriceRows * len);
    out.labels.push_back(w.label);
  }
  return out;
}

// ---------------------------------------------------------------------------

TechFilterBank TechFilterBank::builtin(std::size_t m) {
  TechFilterBank bank;
  bank.length = m;
  bank.templates = builtin_templates(m);
  bank.validate();
  return bank;
}

void TechFilterBank::validate() const {
  if (templates.size() != kTemplatesPerLength) {
    throw ParameterError("filter bank needs " + std::to_string(kTemplatesPerLength) + " templates");
  }
  for (const auto& t : templates) {
    if (t.length() != length) throw ParameterError("template " + t.name() + " has the wrong length");
  }
}

const TechFeatureRow* SymbolFeatures::find(Date date) const {
  auto it = std::lower_bound(rows.begin(), rows.end(), date,
                             [](const TechFeatureRow& r, Date d) { return r.date < d; });
  return it != rows.end() && it->date == date ? &*it : nullptr;
}

const TechFeatureRow* TechFeatureMap::find(std::string_view symbol, Date date) const {
  auto it = std::lower_bound(series.begin(), series.end(), symbol,
                             [](const SymbolFeatures& s, std::string_view v) { return s.symbol < v; });
  return it != series.end() && it->symbol == symbol ? it->find(date) : nullptr;
}

TechFeatureMap technical_feature_map(const PricePanel& panel, const TechFilterBank& bank) {
  bank.validate();
  TechFeatureMap out;
  out.length = bank.length;
  const std::size_t m = bank.length;
  for (const auto& s : panel.series()) {
    SymbolFeatures f;
    f.symbol = s.symbol;
    const std::size_t n = s.bars.size();
    out.dropped += std::min(n, m - 1);
    for (std::size_t t = m - 1; t < n; ++t) {
      TechFeatureRow row;
      row.date = s.bars[t].date;
      const auto raw = raw_window(s, t, m);
      for (std::size_t j = 0; j < kTemplatesPerLength; ++j) {
        row.channels[j] = similarity(raw, bank.templates[j]);
      }
      f.rows.push_back(row);
    }
    out.series.push_back(std::move(f));
  }
  return out;
}

nnet::Dataset technical_dataset(const TechFeatureMap& features, const WindowSet& windows,
                                std::size_t* missing) {
  std::vector<const TechFeatureRow*> rows;
  std::vector<ReturnClass> labels;
  std::size_t skipped = 0;
  for (const auto& w : windows.windows) {
    const TechFeatureRow* r = features.find(w.symbol, w.anchor);
    if (r == nullptr) {
      ++skipped;
      continue;
    }
    rows.push_back(r);
    labels.push_back(w.label);
  }
  if (missing != nullptr) *missing = skipped;
  nnet::Dataset out;
  out.inputs = nnet::Tensor({rows.size(), kTemplatesPerLength});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i]->channels.begin(), rows[i]->channels.end(),
              out.inputs.data() + i * kTemplatesPerLength);
  }
  out.labels = std::move(labels);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ProbPair> to_prob_pairs(const nnet::Tensor& probs) {
  if (probs.rank() != 2 || probs.dim(1) != 2) throw ShapeError("expected [N, 2] probabilities");
  std::vector<ProbPair> out(probs.batch());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {probs[2 * i], probs[2 * i + 1]};
  return out;
}

PredictionSet make_predictions(std::string model, const WindowSet& windows,
                               const nnet::Tensor& probs) {
  if (probs.batch() != windows.size()) throw ShapeError("prediction count does not match windows");
  PredictionSet out;
  out.model = std::move(model);
  out.probs = to_prob_pairs(probs);
  for (const auto& w : windows.windows) {
    out.keys.push_back({w.symbol, w.anchor});
    out.labels.push_back(w.label);
    out.next_returns.push_back(w.next_return);
  }
  return out;
}

std::size_t ThresholdedPrediction::decided_count() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const auto& p) { return p.decided; }));
}

double ThresholdedPrediction::retention() const {
  return points.empty() ? 0.0
                        : static_cast<double>(decided_count()) / static_cast<double>(points.size());
}

std::optional<double> ThresholdedPrediction::accuracy(std::span<const ReturnClass> labels) const {
  if (labels.size() != points.size()) throw ShapeError("label count does not match predictions");
  std::size_t decided = 0, correct = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].decided) continue;
    ++decided;
    correct += points[i].cls == labels[i];
  }
  if (decided == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(decided);
}

ThresholdedPrediction apply_threshold(std::span<const ProbPair> probs, double alpha) {
  if (!(alpha >= 0.5 && alpha <= 1.0)) {
    throw ParameterError("threshold alpha must lie in [0.5, 1]");
  }
  ThresholdedPrediction out;
  out.alpha = alpha;
  out.points.reserve(probs.size());
  for (const auto& p : probs) {
    ThresholdedPoint t;
    t.probs = p;
    t.confidence = p.confidence();
    t.decided = t.confidence >= alpha;
    t.cls = p.argmax();
    out.points.push_back(t);
  }
  return out;
}

std::vector<double> confidences(std::span<const ProbPair> probs) {
  std::vector<double> out;
  out.reserve(probs.size());
  for (const auto& p : probs) out.push_back(p.confidence());
  return out;
}

ThresholdSelection select_threshold(std::span<const double> conf, double retain) {
  if (!(retain > 0.0 && retain < 1.0)) throw ParameterError("retain fraction must be in (0, 1)");
  if (conf.empty()) throw EmptyInputError("no confidences to threshold");
  const std::size_t n = conf.size();
  std::vector<double> sorted(conf.begin(), conf.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  ThresholdSelection out;
  out.retain = retain;
  const double want = retain * static_cast<double>(n);
  if (want < 1.0) {
    out.target = 1;
    out.warnings.push_back("retain x N < 1: keeping only the most confident point");
  } else {
    out.target = std::min(n, static_cast<std::size_t>(std::ceil(want - 1e-9)));
  }
  out.alpha = sorted[out.target - 1];
  out.decided = static_cast<std::size_t>(
      std::count_if(conf.begin(), conf.end(), [&](double c) { return c >= out.alpha; }));
  out.achieved_retention = static_cast<double>(out.decided) / static_cast<double>(n);
  if (out.decided > out.target) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "ties at alpha %.6f keep %zu points instead of %zu (retention %.4f)", out.alpha,
                  out.decided, out.target, out.achieved_retention);
    out.warnings.emplace_back(buf);
  }
  if (out.alpha < 0.5) out.alpha = 0.5;  // two-class confidences are never below 0.5
  return out;
}

double sweep_alpha(std::size_t i) { return static_cast<double>(100 + i) / 200.0; }

std::vector<SweepRow> threshold_sweep(std::span<const ProbPair> probs,
                                      std::span<const ReturnClass> labels) {
  if (probs.size() != labels.size()) throw ShapeError("label count does not match predictions");
  std::vector<SweepRow> out;
  for (std::size_t i = 0; i < kSweepSteps; ++i) {
    const auto t = apply_threshold(probs, sweep_alpha(i));
    SweepRow row;
    row.alpha = t.alpha;
    row.decided = t.decided_count();
    row.retention = t.retention();
    row.accuracy = t.accuracy(labels);
    out.push_back(row);
  }
  return out;
}

std::vector<ProbPair> ensemble_proba(std::span<const std::vector<ProbPair>> members) {
  if (members.empty()) throw ParameterError("ensemble needs at least one member");
  const std::size_t n = members.front().size();
  for (const auto& m : members) {
    if (m.size() != n) throw ParameterError("ensemble members are not aligned (different lengths)");
  }
  const double k = static_cast<double>(members.size());
  std::vector<ProbPair> out(n, ProbPair{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    double neg = 0.0, pos = 0.0;
    for (const auto& m : members) {
      neg += m[i].negative;
      pos += m[i].positive;
    }
    out[i] = {neg / k, pos / k};
  }
  return out;
}

PredictionSet ensemble_predictions(std::span<const PredictionSet> members, std::string name) {
  if (members.empty()) throw ParameterError("ensemble needs at least one member");
  const auto& first = members.front();
  std::vector<std::vector<ProbPair>> probs;
  for (const auto& m : members) {
    if (m.keys != first.keys) {
      throw ParameterError("ensemble member " + m.model + " is not aligned with " + first.model +
                           " by (symbol, date)");
    }
    probs.push_back(m.probs);
  }
  PredictionSet out;
  out.model = std::move(name);
  out.keys = first.keys;
  out.labels = first.labels;
  out.next_returns = first.next_returns;
  out.probs = ensemble_proba(probs);
  return out;
}

// ---------------------------------------------------------------------------

KnnResult knn_predict(const WindowSet& train, const WindowSet& test, std::size_t k) {
  if (train.empty()) throw EmptyInputError("k-NN training set is empty");
  if (k < 1) throw ParameterError("k must be >= 1");
  if (k > train.size()) {
    throw ParameterError("k = " + std::to_string(k) + " exceeds the training set size " +
                         std::to_string(train.size()));
  }
  const std::size_t dim = train.windows.front().values.size();
  std::vector<double> flat(train.size() * dim);
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.windows[i].values.size() != dim) throw ShapeError("k-NN windows differ in size");
    std::copy(train.windows[i].values.begin(), train.windows[i].values.end(), flat.data() + i * dim);
  }

  KnnResult out;
  std::vector<std::pair<double, std::size_t>> dist(train.size());
  for (const auto& w : test.windows) {
    if (w.values.size() != dim) throw ShapeError("k-NN windows differ in size");
    for (std::size_t i = 0; i < train.size(); ++i) {
      const double* x = flat.data() + i * dim;
      double d = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double diff = x[j] - w.values[j];
        d += diff * diff;
      }
      dist[i] = {d, i};
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    std::size_t positive = 0;
    for (std::size_t i = 0; i < k; ++i) {
      positive += train.windows[dist[i].second].label == ReturnClass::positive;
    }
    const std::size_t negative = k - positive;
    if (positive == negative) ++out.ties;
    out.classes.push_back(positive >= negative ? ReturnClass::positive : ReturnClass::negative);
    out.positive_share.push_back(static_cast<double>(positive) / static_cast<double>(k));
  }
  return out;
}

}  // namespace candlenet
