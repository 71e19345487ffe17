#include "candlenet/cli/commands.hpp"

#include "candlenet/backtest.hpp"
#include "candlenet/cli/render.hpp"
#include "candlenet/error.hpp"
#include "candlenet/hash.hpp"
#include "candlenet/matcher.hpp"
#include "candlenet/nnet/serialize.hpp"
#include "candlenet/nnet/train.hpp"
#include "candlenet/patterns.hpp"
#include "candlenet/stats.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

namespace candlenet::cli {

namespace fs = std::filesystem;

namespace {

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

std::string slug(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

// Runs jobs[0..n) on up to `threads` workers; rethrows the first failure in
// job order.
template <typename Job>
void run_parallel(std::size_t n, std::size_t threads, Job job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::min(n, std::max<std::size_t>(threads, 1));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::uint64_t dataset_digest(const nnet::Dataset& d) {
  Fnv1a h;
  h.update(d.inputs.values());
  for (auto l : d.labels) h.update_u64(static_cast<std::uint64_t>(l));
  return h.digest();
}

}  // namespace

// ---------------------------------------------------------------------------
// Data preparation
// ---------------------------------------------------------------------------

PricePanel load_panel(const RunConfig& config) {
  if (!config.data_path.empty()) {
    auto loaded = load_ohlc_csv(config.data_path);
    if (!loaded.rejected.empty()) {
      warn(std::to_string(loaded.rejected.size()) + " row(s) rejected from " + config.data_path +
           "; first at line " + std::to_string(loaded.rejected.front().line) + ": " +
           loaded.rejected.front().reason);
    }
    return std::move(loaded.panel);
  }
  if (!config.synth_path.empty() || config.synth_requested) {
    SyntheticSpec spec = config.synth;
    if (!config.synth_path.empty()) {
      std::ifstream in(config.synth_path);
      if (!in) throw DataError("cannot open synthetic spec " + config.synth_path);
      spec = parse_synthetic_spec(in);
      spec.seed = config.seed;
    }
    return generate_synthetic(spec).panel;
  }
  throw ParameterError("no input data: pass --data <csv> or synthetic settings (--synth ...)");
}

PreparedData prepare_data(const RunConfig& config, PricePanel panel) {
  if (panel.empty()) throw EmptyInputError("panel is empty");
  PreparedData out;
  out.returns = compute_returns(panel);
  for (const auto& s : out.returns.excluded) warn("symbol " + s + " has fewer than two bars");
  const auto labels = label_returns(out.returns, config.seed);

  SplitConfig split;
  split.window_length = config.window_length;
  split.noise_seed = config.seed;
  const bool explicit_ranges = !config.train_start.empty() || !config.train_end.empty() ||
                               !config.test_start.empty() || !config.test_end.empty();
  if (explicit_ranges) {
    auto date_or = [](const std::string& text, Date fallback) {
      return text.empty() ? fallback : *Date::parse(text);
    };
    split.train = {date_or(config.train_start, panel.first_date()),
                   date_or(config.train_end, panel.last_date())};
    split.test = {date_or(config.test_start, panel.first_date()),
                  date_or(config.test_end, panel.last_date())};
  } else {
    std::set<Date> dates;
    for (const auto& s : panel.series()) {
      for (const auto& b : s.bars) dates.insert(b.date);
    }
    std::vector<Date> sorted(dates.begin(), dates.end());
    const auto cut = static_cast<std::size_t>(
        std::floor(config.train_fraction * static_cast<double>(sorted.size())));
    if (cut < 1 || cut >= sorted.size()) throw DataError("too few dates to split");
    split.train = {sorted.front(), sorted[cut - 1]};
    split.test = {sorted[cut], sorted.back()};
  }
  split.validate();
  out.split = split;

  auto windows = make_windows(panel, labels, split);
  if (windows.train.empty()) throw EmptyInputError("no training windows in the training range");
  if (windows.test.empty()) throw EmptyInputError("no test windows in the test range");
  const std::size_t degenerate = windows.train.degenerate_count() + windows.test.degenerate_count();
  if (degenerate > 0) warn(std::to_string(degenerate) + " degenerate (constant) window(s)");

  if (config.paper_mode || config.validation_fraction == 0.0) {
    out.fit = std::move(windows.train);
  } else {
    auto [fit, validation] = split_tail(windows.train, config.validation_fraction);
    out.fit = std::move(fit);
    out.validation = std::move(validation);
  }
  if (out.fit.empty()) throw EmptyInputError("no windows left for fitting");
  out.test = std::move(windows.test);
  out.panel = std::move(panel);
  return out;
}

std::uint64_t model_seed(std::uint64_t master, ModelKind kind) {
  return mix64(master ^ fnv1a(to_string(kind)));
}

ThresholdSelection choose_alpha(const RunConfig& config, const PredictionSet& validation,
                                const PredictionSet& test) {
  const PredictionSet* source = &validation;
  std::vector<std::string> notes;
  if (config.paper_mode) {
    source = &test;
  } else if (validation.size() == 0) {
    source = &test;
    notes.push_back("no validation slice; threshold chosen on test outputs");
  }
  auto sel = select_threshold(confidences(source->probs), config.retain);
  sel.warnings.insert(sel.warnings.begin(), notes.begin(), notes.end());
  return sel;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct Inputs {
  nnet::Dataset fit, validation, test;
};

Inputs inputs_for(ModelKind kind, const RunConfig& config, const PreparedData& data) {
  Inputs in;
  if (kind == ModelKind::tech_mlp) {
    const auto bank = TechFilterBank::builtin(config.model_options.tech_length);
    const auto features = technical_feature_map(data.panel, bank);
    std::size_t missing = 0, m = 0;
    in.fit = technical_dataset(features, data.fit, &m);
    missing += m;
    in.validation = technical_dataset(features, data.validation, &m);
    missing += m;
    in.test = technical_dataset(features, data.test, &m);
    missing += m;
    if (missing > 0) throw DataError("technical features missing for " + std::to_string(missing) + " windows");
  } else {
    in.fit = to_dataset(data.fit, kind);
    in.validation = to_dataset(data.validation, kind);
    in.test = to_dataset(data.test, kind);
  }
  return in;
}

void finish_thresholds(TrainedModel& m, const RunConfig& config) {
  m.selection = choose_alpha(config, m.rows.validation, m.rows.test);
  m.rows.alpha = m.selection.alpha;
}

TrainedModel train_network(ModelKind kind, const RunConfig& config, const PreparedData& data) {
  TrainedModel out;
  out.kind = kind;
  out.seed = model_seed(config.seed, kind);
  const auto in = inputs_for(kind, config, data);
  auto net = build_model(kind, out.seed, config.model_options);
  nnet::TrainConfig tc = config.train;
  tc.seed = out.seed;
  out.epochs = nnet::train(net, in.fit, tc, config.eval_each_epoch ? &in.test : nullptr);

  const std::string name(to_string(kind));
  out.rows.model = name;
  out.rows.validation = make_predictions(name, data.validation, nnet::predict_proba(net, in.validation.inputs));
  out.rows.test = make_predictions(name, data.test, nnet::predict_proba(net, in.test.inputs));
  finish_thresholds(out, config);

  out.meta["kind"] = name;
  out.meta["seed"] = std::to_string(out.seed);
  out.meta["master_seed"] = std::to_string(config.seed);
  out.meta["train"] = tc.describe();
  out.meta["config_digest"] = config.digest();
  out.meta["data_digest"] = hex64(dataset_digest(in.fit));
  out.meta["alpha"] = format_number(out.selection.alpha);
  out.meta["retention"] = format_number(out.selection.achieved_retention);
  if (kind == ModelKind::tech_mlp) {
    out.meta["tech_length"] = std::to_string(config.model_options.tech_length);
  }
  out.network = std::move(net);
  return out;
}

TrainedModel run_knn(const RunConfig& config, const PreparedData& data) {
  TrainedModel out;
  out.kind = ModelKind::knn;
  out.rows.model = "knn";
  auto to_set = [&](const WindowSet& windows) {
    nnet::Tensor probs({windows.size(), 2});
    if (!windows.empty()) {
      const auto r = knn_predict(data.fit, windows, config.knn_k);
      if (r.ties > 0) warn("knn: " + std::to_string(r.ties) + " tied vote(s) sent to the positive class");
      for (std::size_t i = 0; i < windows.size(); ++i) {
        probs[2 * i] = 1.0 - r.positive_share[i];
        probs[2 * i + 1] = r.positive_share[i];
      }
    }
    return make_predictions("knn", windows, probs);
  };
  out.rows.validation = to_set(data.validation);
  out.rows.test = to_set(data.test);
  finish_thresholds(out, config);
  return out;
}

}  // namespace

std::vector<TrainedModel> train_models(const RunConfig& config, const PreparedData& data) {
  const bool want_ensemble =
      std::find(config.models.begin(), config.models.end(), ModelKind::ensemble) != config.models.end();
  std::vector<ModelKind> order;
  auto add = [&](ModelKind k) {
    if (std::find(order.begin(), order.end(), k) == order.end()) order.push_back(k);
  };
  for (auto k : config.models) {
    if (k == ModelKind::ensemble) {
      for (auto m : kEnsembleMembers) add(m);
    } else {
      add(k);
    }
  }

  std::vector<TrainedModel> out(order.size());
  run_parallel(order.size(), config.threads, [&](std::size_t i) {
    out[i] = order[i] == ModelKind::knn ? run_knn(config, data) : train_network(order[i], config, data);
  });

  if (want_ensemble) {
    std::vector<PredictionSet> val, test;
    for (auto m : kEnsembleMembers) {
      const auto& t = *std::find_if(out.begin(), out.end(), [&](const auto& x) { return x.kind == m; });
      val.push_back(t.rows.validation);
      test.push_back(t.rows.test);
    }
    TrainedModel e;
    e.kind = ModelKind::ensemble;
    e.rows.model = "ensemble";
    e.rows.validation = ensemble_predictions(val);
    e.rows.test = ensemble_predictions(test);
    finish_thresholds(e, config);
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

void cmd_ingest(const RunConfig& config) {
  if (config.data_path.empty()) throw ParameterError("ingest needs --data <csv>");
  const auto loaded = load_ohlc_csv(config.data_path);
  std::ostringstream panel;
  write_ohlc_csv(panel, loaded.panel);
  write_artifact(config, "panel.csv", "ohlc", 1, panel.str());
  std::ostringstream rejected;
  rejected << "line,reason\n";
  for (const auto& r : loaded.rejected) rejected << r.line << ',' << r.reason << '\n';
  write_artifact(config, "rejected.csv", "rejected", 1, rejected.str());
  std::cout << "ingested " << loaded.panel.bar_count() << " bars for " << loaded.panel.symbol_count()
            << " symbols; rejected " << loaded.rejected.size() << " row(s)\n";
}

void cmd_synth(const RunConfig& config) {
  SyntheticSpec spec = config.synth;
  if (!config.synth_path.empty()) {
    std::ifstream in(config.synth_path);
    if (!in) throw DataError("cannot open synthetic spec " + config.synth_path);
    spec = parse_synthetic_spec(in);
    spec.seed = config.seed;
  }
  const auto synth = generate_synthetic(spec);
  std::ostringstream panel;
  write_ohlc_csv(panel, synth.panel);
  write_artifact(config, "panel.csv", "ohlc", 1, panel.str());
  std::ostringstream info;
  info << "key,value\n"
       << "symbols," << spec.symbols << '\n'
       << "length," << spec.length << '\n'
       << "volatility," << format_number(spec.volatility) << '\n'
       << "drift," << format_number(spec.plant.drift) << '\n'
       << "bayes_accuracy," << format_number(synth.bayes_accuracy) << '\n';
  write_artifact(config, "synth_info.csv", "synth-info", 1, info.str());
  std::cout << "generated " << synth.panel.bar_count() << " bars; planted Bayes accuracy "
            << format_fixed(synth.bayes_accuracy, 4) << '\n';
}

void cmd_eval_patterns(const RunConfig& config) {
  const auto panel = load_panel(config);
  const auto returns = compute_returns(panel);
  const auto pooled = returns.pooled();
  if (pooled.size() < 2) throw EmptyInputError("panel has fewer than two returns");
  const auto base = summarize(pooled);

  std::ostringstream table;
  table << "pattern,length,direction,matches,returns,ks_gamma,p_value,mean_bp,mean_dev_bp,std_bp,"
           "median_bp,q1_bp,q3_bp,notch_bp\n";
  auto cdf_body = [](std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    std::ostringstream os;
    os << "return_bp,cdf\n";
    const double n = static_cast<double>(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (i + 1 < sample.size() && sample[i + 1] == sample[i]) continue;
      os << format_number(sample[i] * 1e4) << ',' << format_number(static_cast<double>(i + 1) / n) << '\n';
    }
    return os.str();
  };

  for (const auto& t : all_builtin_templates()) {
    SimilaritySeries series;
    try {
      series = similarity_series(panel, t);
    } catch (const Error& e) {
      throw DataError("pattern " + t.name() + ": " + e.what());
    }
    const auto matches = top_centile_matches(series, config.centile);
    if (matches.below_one) warn("pattern " + t.name() + ": centile x N < 1, using the single best match");
    const auto cond = conditional_returns(matches, returns);
    table << t.name() << ',' << t.length() << ',' << to_string(t.direction()) << ','
          << matches.matches.size() << ',' << cond.returns.size() << ',';
    if (cond.returns.empty()) {
      warn("pattern " + t.name() + ": no matches with a next-day return");
      table << ",,,,,,,,\n";
      continue;
    }
    const auto ks = ks_two_sample(cond.returns, pooled);
    const auto s = summarize(cond.returns);
    table << format_number(ks.statistic) << ',' << format_number(ks.p_value) << ','
          << format_number(s.mean_bp) << ',' << format_number(s.mean_bp - base.mean_bp) << ','
          << opt_cell(s.std_bp) << ',' << format_number(s.median_bp) << ','
          << format_number(s.q1_bp) << ',' << format_number(s.q3_bp) << ','
          << opt_cell(s.notch_bp) << '\n';
    write_artifact(config, "cdf/" + slug(t.name()) + ".csv", "cdf", kCdfSchema, cdf_body(cond.returns));
  }
  table << "Unconditional,,," << pooled.size() << ',' << pooled.size() << ",,,"
        << format_number(base.mean_bp) << ",0," << opt_cell(base.std_bp) << ','
        << format_number(base.median_bp) << ',' << format_number(base.q1_bp) << ','
        << format_number(base.q3_bp) << ',' << opt_cell(base.notch_bp) << '\n';
  write_artifact(config, "cdf/unconditional.csv", "cdf", kCdfSchema, cdf_body(pooled));
  const auto path = write_artifact(config, "patterns.csv", "table1", kTable1Schema, table.str());
  std::cout << "wrote " << path.string() << '\n';
}

void cmd_train(const RunConfig& config) {
  const auto data = prepare_data(config, load_panel(config));
  std::cout << "windows: fit " << data.fit.size() << ", validation " << data.validation.size()
            << ", test " << data.test.size() << '\n';
  const auto models = train_models(config, data);

  std::vector<SignificanceRow> sig;
  std::ostringstream manifest;
  manifest << "model,seed,alpha,retain,target,decided,achieved_retention,config_digest\n";
  for (const auto& m : models) {
    const std::string name(to_string(m.kind));
    for (const auto& w : m.selection.warnings) warn(name + ": " + w);
    write_artifact(config, predictions_file(name), "predictions", kPredictionsSchema,
                   predictions_csv(m.rows));
    write_artifact(config, "sweep_" + name + ".csv", "sweep", kSweepSchema,
                   sweep_csv(threshold_sweep(m.rows.test.probs, m.rows.test.labels)));
    if (!m.epochs.empty()) {
      write_artifact(config, "epochs_" + name + ".csv", "epochs", kEpochsSchema, epochs_csv(m.epochs));
    }
    if (m.network) {
      std::ostringstream file;
      nnet::save_model(file, *m.network, m.meta);
      const fs::path path = fs::path(config.out_dir) / "models" / (name + ".model");
      fs::create_directories(path.parent_path());
      std::ofstream out(path, std::ios::binary);
      out << file.str();
      if (!out) throw DataError("cannot write " + path.string());
    }
    manifest << name << ',' << m.seed << ',' << format_number(m.selection.alpha) << ','
             << format_number(m.selection.retain) << ',' << m.selection.target << ','
             << m.selection.decided << ',' << format_number(m.selection.achieved_retention) << ','
             << config.digest() << '\n';
    sig.push_back(significance_row(m.rows));
    const auto& s = sig.back();
    std::cout << name << ": test accuracy " << format_fixed(s.accuracy, 4) << ", alpha "
              << format_fixed(s.alpha, 4) << ", decided " << s.decided;
    if (s.decided_accuracy) std::cout << " at accuracy " << format_fixed(*s.decided_accuracy, 4);
    std::cout << ", AUC " << format_fixed(s.auc.auc, 4) << '\n';
  }
  write_artifact(config, "significance.csv", "significance", kSignificanceSchema, significance_csv(sig));
  write_artifact(config, "manifest.csv", "manifest", kManifestSchema, manifest.str());
}

namespace {

PredictionRows load_rows(const RunConfig& config, ModelKind kind) {
  const std::string name(to_string(kind));
  return read_predictions(fs::path(config.predictions_location()) / predictions_file(name), name);
}

}  // namespace

void cmd_sweep(const RunConfig& config) {
  for (auto k : config.models) {
    const auto rows = load_rows(config, k);
    const std::string name(to_string(k));
    write_artifact(config, "sweep_" + name + ".csv", "sweep", kSweepSchema,
                   sweep_csv(threshold_sweep(rows.test.probs, rows.test.labels)));
  }
}

void cmd_ensemble(const RunConfig& config) {
  std::vector<PredictionSet> val, test;
  for (auto m : kEnsembleMembers) {
    auto rows = load_rows(config, m);
    val.push_back(std::move(rows.validation));
    test.push_back(std::move(rows.test));
  }
  PredictionRows e;
  e.model = "ensemble";
  e.validation = ensemble_predictions(val);
  e.test = ensemble_predictions(test);
  const auto sel = choose_alpha(config, e.validation, e.test);
  for (const auto& w : sel.warnings) warn("ensemble: " + w);
  e.alpha = sel.alpha;
  write_artifact(config, predictions_file("ensemble"), "predictions", kPredictionsSchema, predictions_csv(e));
  write_artifact(config, "sweep_ensemble.csv", "sweep", kSweepSchema,
                 sweep_csv(threshold_sweep(e.test.probs, e.test.labels)));
  std::cout << "ensemble: alpha " << format_fixed(sel.alpha, 4) << ", decided " << sel.decided << '\n';
}

void cmd_significance(const RunConfig& config) {
  std::vector<SignificanceRow> rows;
  for (auto k : config.models) rows.push_back(significance_row(load_rows(config, k)));
  write_artifact(config, "significance.csv", "significance", kSignificanceSchema, significance_csv(rows));
}

void cmd_backtest(const RunConfig& config) {
  std::vector<BacktestRow> summary;
  for (auto k : config.models) {
    const auto rows = load_rows(config, k);
    const std::string name(to_string(k));
    const auto decisions = apply_threshold(rows.test.probs, rows.alpha);
    const auto log = make_trade_log(rows.test, decisions);
    if (log.dropped > 0) warn(name + ": " + std::to_string(log.dropped) + " decided point(s) without a return");
    if (log.trades.empty()) warn(name + ": no decided test points; profit is zero");

    std::set<Date> days;
    for (const auto& key : rows.test.keys) days.insert(key.date);
    const std::vector<Date> calendar(days.begin(), days.end());
    double years = 0.0;
    if (config.years) {
      years = *config.years;
    } else if (calendar.size() >= 2) {
      years = calendar_years(calendar.front(), calendar.back());
    }
    if (!(years > 0.0)) throw ParameterError("cannot infer the test span in years; pass --years");

    std::vector<BacktestReport> reports;
    for (double cost : config.costs) {
      auto rep = simulate(log, cost, calendar);
      BacktestRow row;
      row.model = name;
      row.cost = cost;
      row.trades = rep.trades;
      row.profit = rep.profit;
      row.cagr_percent = rep.profit > -1.0 ? cagr_percent(rep.profit, years) : std::nan("");
      std::vector<double> pnl;
      for (const auto& d : rep.days) pnl.push_back(d.pnl);
      try {
        row.sharpe = sharpe_ratio(pnl);
      } catch (const Error& e) {
        warn(name + ": " + e.what());
      }
      row.max_drawdown = rep.max_drawdown;
      row.breakeven_cost = rep.trades > 0 ? breakeven_cost(rep) : 0.0;
      row.dropped = log.dropped;
      summary.push_back(row);
      reports.push_back(std::move(rep));
    }
    write_artifact(config, "equity_" + name + ".csv", "equity", kEquitySchema, equity_csv(reports));
    write_artifact(config, "activity_" + name + ".csv", "activity", kActivitySchema,
                   activity_csv(activity_series(log, calendar)));
  }
  write_artifact(config, "backtest.csv", "backtest", kBacktestSchema, backtest_csv(summary));
}

void cmd_export_filters(const RunConfig& config) {
  if (config.model_path.empty()) throw ParameterError("export-filters needs --model <file>");
  const auto file = nnet::load_model(config.model_path);
  const auto& net = file.network;
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    const auto spec = net.layer(i).spec();
    if (spec.kind != nnet::LayerKind::conv) continue;
    const auto& weight = net.layer(i).parameters()[0].value;
    const auto filters = filters_from_weights(weight.values(), spec.filters, spec.width);
    // SVG must open with the root element, so the metadata goes in a comment
    // just inside it.
    auto write_raw = [&](const std::string& name, const std::string& body, const std::string& schema) {
      const fs::path path = fs::path(config.out_dir) / name;
      fs::create_directories(path.parent_path());
      std::ofstream out(path, std::ios::binary);
      std::string svg = body;
      const auto pos = svg.find('\n');
      out << svg.substr(0, pos + 1) << "<!--\n" << metadata_header(config, schema, 1) << "-->\n"
          << svg.substr(pos + 1);
      if (!out) throw DataError("cannot write " + path.string());
    };
    write_raw("hinton.svg", hinton_svg(filters), "hinton-svg");
    write_raw("candles.svg", candles_svg(filters), "candles-svg");
    write_artifact(config, "hinton.txt", "hinton-text", 1, hinton_text(filters));
    std::ostringstream csv;
    csv << "filter,row,col,weight\n";
    static constexpr const char* kRows[] = {"open", "close", "low", "high"};
    for (std::size_t f = 0; f < filters.size(); ++f) {
      for (std::size_t r = 0; r < kPriceRows; ++r) {
        for (std::size_t c = 0; c < filters[f].cols; ++c) {
          csv << f << ',' << kRows[r] << ',' << c << ',' << format_number(filters[f].at(r, c)) << '\n';
        }
      }
    }
    write_artifact(config, "filters.csv", "filters", 1, csv.str());
    std::cout << "exported " << filters.size() << " filters of width " << spec.width << '\n';
    return;
  }
  throw ParameterError("model " + config.model_path + " has no convolution layer; export-filters supports cnn models only");
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv) {
  CLI::App app{"Candlestick pattern evaluation and thresholded CNN forecasting"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig config;
  RawOptions raw;
  add_options(app, config, raw);

  struct Command {
    const char* name;
    const char* help;
    void (*fn)(const RunConfig&);
  };
  static const Command kCommands[] = {
      {"ingest", "Validate an OHLC CSV and write the cleaned panel", cmd_ingest},
      {"synth", "Generate a synthetic OHLC panel", cmd_synth},
      {"eval-patterns", "K-S tests and return summaries for the 24 chartist templates", cmd_eval_patterns},
      {"train", "Train models, threshold outputs, write predictions and metrics", cmd_train},
      {"sweep", "Accuracy and retention over the alpha grid from prediction files", cmd_sweep},
      {"ensemble", "Average the cnn-1/2/3 prediction files", cmd_ensemble},
      {"backtest", "Trading simulation with per-trade costs from prediction files", cmd_backtest},
      {"significance", "AUC / Mann-Whitney rows from prediction files", cmd_significance},
      {"export-filters", "Hinton and candlestick renderings of learned filters", cmd_export_filters},
  };
  for (const auto& c : kCommands) app.add_subcommand(c.name, c.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& c : kCommands) {
      if (app.got_subcommand(c.name)) config.command = c.name;
    }
    for (const auto* o : app.get_options()) {
      if (o->get_name().rfind("--synth-", 0) == 0 && o->count() > 0) config.synth_requested = true;
    }
    finalize(config, raw);
    for (const auto& c : kCommands) {
      if (config.command == c.name) c.fn(config);
    }
    return 0;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("candlenet");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace candlenet::cli
