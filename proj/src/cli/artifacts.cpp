#include "candlenet/cli/artifacts.hpp"

#include "candlenet/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace candlenet::cli {

namespace fs = std::filesystem;

std::string tool_version() { return CANDLENET_VERSION; }

std::string metadata_header(const RunConfig& config, const std::string& schema, int version) {
  std::ostringstream os;
  os << "# candlenet " << tool_version() << '\n'
     << "# command: " << config.command << '\n'
     << "# seed: " << config.seed << '\n'
     << "# config_digest: " << config.digest() << '\n'
     << "# schema: " << schema << " v" << version << '\n';
  return os.str();
}

fs::path write_artifact(const RunConfig& config, const std::string& name, const std::string& schema,
                        int version, const std::string& body) {
  const fs::path path = fs::path(config.out_dir) / name;
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << metadata_header(config, schema, version) << body;
  if (!out) throw DataError("failed writing " + path.string());
  return path;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const fs::path& path, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

void append_rows(std::ostringstream& os, const char* tag, const PredictionSet& set, double alpha) {
  const auto t = apply_threshold(set.probs, alpha);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& p = t.points[i];
    os << tag << ',' << set.keys[i].symbol << ',' << set.keys[i].date.iso() << ','
       << format_number(p.probs.negative) << ',' << format_number(p.probs.positive) << ','
       << format_number(p.confidence) << ',' << (p.decided ? 1 : 0) << ','
       << static_cast<int>(p.cls) << ',' << static_cast<int>(set.labels[i]) << ','
       << format_number(set.next_returns[i]) << '\n';
  }
}

}  // namespace

std::string predictions_file(const std::string& model) { return "predictions_" + model + ".csv"; }

std::string predictions_csv(const PredictionRows& rows) {
  std::ostringstream os;
  os << "# model: " << rows.model << '\n' << "# alpha: " << format_number(rows.alpha) << '\n';
  os << "split,symbol,date,p_neg,p_pos,confidence,decided,class,label,next_return\n";
  append_rows(os, "validation", rows.validation, rows.alpha);
  append_rows(os, "test", rows.test, rows.alpha);
  return os.str();
}

PredictionRows read_predictions(const fs::path& path, const std::string& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("no predictions for model " + model + " (" + path.string() + ")");
  PredictionRows rows;
  rows.model = model;
  rows.validation.model = rows.test.model = model;
  bool have_alpha = false, have_header = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# alpha: ", 0) == 0) {
        rows.alpha = to_double(line.substr(9), path, lineno);
        have_alpha = true;
      }
      continue;
    }
    if (!have_header) {
      if (line.rfind("split,symbol,date,", 0) != 0) {
        throw SchemaError(path.string() + ": not a predictions file");
      }
      have_header = true;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != 10) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 10 columns");
    }
    PredictionSet* set = cells[0] == "test" ? &rows.test
                         : cells[0] == "validation" ? &rows.validation
                                                    : nullptr;
    if (set == nullptr) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad split");
    const auto date = Date::parse(cells[2]);
    if (!date) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad date");
    set->keys.push_back({cells[1], *date});
    set->probs.push_back({to_double(cells[3], path, lineno), to_double(cells[4], path, lineno)});
    set->labels.push_back(cells[8] == "1" ? ReturnClass::positive : ReturnClass::negative);
    set->next_returns.push_back(to_double(cells[9], path, lineno));
  }
  if (!have_header || !have_alpha) throw SchemaError(path.string() + ": missing header or alpha");
  return rows;
}

std::string epochs_csv(const std::vector<nnet::EpochMetrics>& epochs) {
  std::ostringstream os;
  os << "epoch,loss,train_accuracy,test_accuracy\n";
  for (const auto& e : epochs) {
    os << e.epoch << ',' << format_number(e.loss) << ',' << format_number(e.train_accuracy) << ','
       << opt(e.eval_accuracy) << '\n';
  }
  return os.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "alpha,decided,retention,accuracy\n";
  for (const auto& r : rows) {
    os << format_fixed(r.alpha, 3) << ',' << r.decided << ',' << format_number(r.retention) << ','
       << opt(r.accuracy) << '\n';
  }
  return os.str();
}

SignificanceRow significance_row(const PredictionRows& rows) {
  const auto& test = rows.test;
  SignificanceRow out;
  out.model = rows.model;
  out.n = test.size();
  out.alpha = rows.alpha;
  if (test.size() == 0) throw EmptyInputError("model " + rows.model + " has no test predictions");
  std::vector<ReturnClass> predicted;
  std::vector<double> scores;
  for (const auto& p : test.probs) {
    predicted.push_back(p.argmax());
    scores.push_back(p.positive);
  }
  out.accuracy = accuracy(test.labels, predicted);
  const auto t = apply_threshold(test.probs, rows.alpha);
  out.decided = t.decided_count();
  out.decided_accuracy = t.accuracy(test.labels);
  out.auc = mww_auc(scores, test.labels);
  return out;
}

std::string significance_csv(const std::vector<SignificanceRow>& rows) {
  std::ostringstream os;
  os << "model,n,accuracy,alpha,decided,decided_accuracy,auc,u,mu_u,sigma_u,z,significance\n";
  for (const auto& r : rows) {
    os << r.model << ',' << r.n << ',' << format_number(r.accuracy) << ','
       << format_number(r.alpha) << ',' << r.decided << ',' << opt(r.decided_accuracy) << ','
       << format_number(r.auc.auc) << ',' << format_number(r.auc.u) << ','
       << format_number(r.auc.mu_u) << ',' << format_number(r.auc.sigma_u) << ','
       << format_number(r.auc.z) << ',' << opt(r.auc.significance) << '\n';
  }
  return os.str();
}

std::string backtest_csv(const std::vector<BacktestRow>& rows) {
  std::ostringstream os;
  os << "model,cost,trades,profit,cagr_pct,sharpe,max_drawdown,breakeven_cost,dropped\n";
  for (const auto& r : rows) {
    os << r.model << ',' << format_number(r.cost) << ',' << r.trades << ','
       << format_number(r.profit) << ',' << format_number(r.cagr_percent) << ',' << opt(r.sharpe)
       << ',' << format_number(r.max_drawdown) << ',' << format_number(r.breakeven_cost) << ','
       << r.dropped << '\n';
  }
  return os.str();
}

std::string equity_csv(const std::vector<BacktestReport>& reports) {
  std::ostringstream os;
  os << "cost,date,daily_pnl,cumulative\n";
  for (const auto& rep : reports) {
    for (const auto& d : rep.days) {
      os << format_number(rep.cost) << ',' << d.date.iso() << ',' << format_number(d.pnl) << ','
         << format_number(d.cumulative) << '\n';
    }
  }
  return os.str();
}

std::string activity_csv(const std::vector<ActivityDay>& days) {
  std::ostringstream os;
  os << "date,buys,sells\n";
  for (const auto& d : days) os << d.date.iso() << ',' << d.buys << ',' << d.sells << '\n';
  return os.str();
}

}  // namespace candlenet::cli
