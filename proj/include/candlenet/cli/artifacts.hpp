#pragma once

#include "candlenet/backtest.hpp"
#include "candlenet/cli/run_config.hpp"
#include "candlenet/models.hpp"
#include "candlenet/nnet/train.hpp"
#include "candlenet/stats.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace candlenet::cli {

std::string tool_version();

// Column-schema versions of the CSV artifacts. Bump when columns change.
inline constexpr int kTable1Schema = 1;
inline constexpr int kCdfSchema = 1;
inline constexpr int kEpochsSchema = 1;
inline constexpr int kPredictionsSchema = 1;
inline constexpr int kSweepSchema = 1;
inline constexpr int kSignificanceSchema = 1;
inline constexpr int kManifestSchema = 1;
inline constexpr int kBacktestSchema = 1;
inline constexpr int kEquitySchema = 1;
inline constexpr int kActivitySchema = 1;

// "# key: value" lines opening every artifact: tool version, command, seed,
// config digest and the artifact's schema name/version.
std::string metadata_header(const RunConfig& config, const std::string& schema, int version);

// Writes `body` to out_dir/name, creating directories as needed. The file is
// written in binary mode so bytes are identical across runs.
std::filesystem::path write_artifact(const RunConfig& config, const std::string& name,
                                     const std::string& schema, int version,
                                     const std::string& body);

std::string format_number(double v);  // %.17g
std::string format_fixed(double v, int digits);

// --- predictions -----------------------------------------------------------

enum class SplitTag { validation, test };

struct PredictionRows {
  std::string model;
  double alpha = 0.5;
  PredictionSet validation;
  PredictionSet test;
};

// split,symbol,date,p_neg,p_pos,confidence,decided,class,label,next_return
std::string predictions_csv(const PredictionRows& rows);
PredictionRows read_predictions(const std::filesystem::path& path, const std::string& model);
std::string predictions_file(const std::string& model);

// --- tables ------------------------------------------------------------------

// epoch,loss,train_accuracy,test_accuracy
std::string epochs_csv(const std::vector<nnet::EpochMetrics>& epochs);
// alpha,decided,retention,accuracy
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct SignificanceRow {
  std::string model;
  std::size_t n = 0;
  double accuracy = 0.0;  // unthresholded
  double alpha = 0.5;
  std::size_t decided = 0;
  std::optional<double> decided_accuracy;
  AucResult auc;
};

SignificanceRow significance_row(const PredictionRows& rows);
// model,n,accuracy,alpha,decided,decided_accuracy,auc,u,mu_u,sigma_u,z,significance
std::string significance_csv(const std::vector<SignificanceRow>& rows);

struct BacktestRow {
  std::string model;
  double cost = 0.0;
  std::size_t trades = 0;
  double profit = 0.0;
  double cagr_percent = 0.0;
  std::optional<double> sharpe;
  double max_drawdown = 0.0;
  double breakeven_cost = 0.0;
  std::size_t dropped = 0;
};

// model,cost,trades,profit,cagr_pct,sharpe,max_drawdown,breakeven_cost,dropped
std::string backtest_csv(const std::vector<BacktestRow>& rows);
// cost,date,daily_pnl,cumulative
std::string equity_csv(const std::vector<BacktestReport>& reports);
// date,buys,sells
std::string activity_csv(const std::vector<ActivityDay>& days);

}  // namespace candlenet::cli
