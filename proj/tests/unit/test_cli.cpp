#include "candlenet/cli/artifacts.hpp"
#include "candlenet/cli/commands.hpp"
#include "candlenet/cli/render.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace candlenet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Csv {
  std::vector<std::string> comments;
  std::string header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    std::stringstream ss(header);
    std::string cell;
    for (std::size_t i = 0; std::getline(ss, cell, ','); ++i) {
      if (cell == name) return i;
    }
    throw std::runtime_error("no column " + name);
  }
};

Csv read_csv(const fs::path& p) {
  std::istringstream in(slurp(p));
  Csv out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind('#', 0) == 0) {
      out.comments.push_back(line);
    } else if (out.header.empty()) {
      out.header = line;
    } else {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (!line.empty() && line.back() == ',') cells.emplace_back();
      out.rows.push_back(cells);
    }
  }
  return out;
}

std::vector<std::string> synth_flags(const fs::path& out) {
  return {"--synth-symbols", "2",          "--synth-length", "260",       "--synth-plant",
          "body_reversal",   "--seed",     "5",              "--out",     out.string()};
}

int run_with(std::vector<std::string> args, const std::vector<std::string>& extra) {
  args.insert(args.end(), extra.begin(), extra.end());
  return cli::run(args);
}

// One small training run shared by the tests below.
class TrainedRun : public ::testing::Test {
 protected:
  static fs::path dir() { return fs::temp_directory_path() / "candlenet_test_cli_train"; }

  static std::vector<std::string> train_args(const fs::path& out) {
    auto a = synth_flags(out);
    a.insert(a.begin(), "train");
    for (const char* s : {"--epochs", "3", "--batch", "32", "--models", "cnn-1,cnn-2,cnn-3,ensemble",
                          "--retain", "0.05"}) {
      a.emplace_back(s);
    }
    return a;
  }

  static void SetUpTestSuite() {
    fs::remove_all(dir());
    ASSERT_EQ(cli::run(train_args(dir() / "a")), 0);
  }
};

}  // namespace

TEST(CliExitCodes, UsageDataAndNumericFailures) {
  const auto out = test::scratch_dir("cli_exit");
  EXPECT_EQ(cli::run({"no-such-command"}), 1);
  EXPECT_EQ(cli::run({"train", "--epochs", "many"}), 1);
  EXPECT_EQ(cli::run({"ingest", "--data", (out / "missing.csv").string(), "--out", out.string()}), 2);
  std::ofstream(out / "bad.csv") << "date,symbol,open,high,close\n2020-01-02,A,1,2,1.5\n";
  EXPECT_EQ(cli::run({"ingest", "--data", (out / "bad.csv").string(), "--out", out.string()}), 2);
  EXPECT_EQ(cli::run({"synth", "--synth-length", "0", "--out", out.string()}), 1);
  EXPECT_EQ(run_with({"train"}, {"--synth-symbols", "1", "--synth-length", "200", "--epochs", "2",
                                 "--models", "mlp", "--learning-rate", "1e300", "--out",
                                 out.string()}),
            3);
}

TEST(CliIngest, CleansAndReportsRejectedRows) {
  const auto out = test::scratch_dir("cli_ingest");
  std::ofstream(out / "in.csv") << "date,symbol,open,high,low,close\n"
                                   "2020-01-02,A,10,11,9,10.5\n"
                                   "2020-01-03,A,10,9,8,8.5\n"
                                   "2020-01-06,A,10.5,11,10,10.8\n";
  ASSERT_EQ(cli::run({"ingest", "--data", (out / "in.csv").string(), "--out", (out / "o").string()}), 0);
  auto panel = read_csv(out / "o" / "panel.csv");
  EXPECT_EQ(panel.header, "date,symbol,open,high,low,close");
  EXPECT_EQ(panel.rows.size(), 2u);
  auto rejected = read_csv(out / "o" / "rejected.csv");
  EXPECT_EQ(rejected.header, "line,reason");
  ASSERT_EQ(rejected.rows.size(), 1u);
  EXPECT_EQ(rejected.rows[0][0], "3");
}

TEST(CliPatterns, TwentyFourRowsPlusBaselineAndStableBytes) {
  const auto out = test::scratch_dir("cli_patterns");
  ASSERT_EQ(run_with({"eval-patterns"}, synth_flags(out / "a")), 0);
  ASSERT_EQ(run_with({"eval-patterns"}, synth_flags(out / "b")), 0);
  auto table = read_csv(out / "a" / "patterns.csv");
  EXPECT_EQ(table.header,
            "pattern,length,direction,matches,returns,ks_gamma,p_value,mean_bp,mean_dev_bp,std_bp,"
            "median_bp,q1_bp,q3_bp,notch_bp");
  ASSERT_EQ(table.rows.size(), 25u);
  EXPECT_EQ(table.rows.back()[0], "Unconditional");
  EXPECT_EQ(slurp(out / "a" / "patterns.csv"), slurp(out / "b" / "patterns.csv"));
  EXPECT_TRUE(fs::exists(out / "a" / "cdf" / "unconditional.csv"));
  // Metadata header: version, command, seed, config digest, schema.
  ASSERT_GE(table.comments.size(), 5u);
  EXPECT_EQ(table.comments[0], "# candlenet " + cli::tool_version());
  EXPECT_EQ(table.comments[2], "# seed: 5");
}

TEST(CliPatterns, PlantedReversalFavoursCrows) {
  const auto out = test::scratch_dir("cli_crows");
  ASSERT_EQ(cli::run({"eval-patterns", "--synth-symbols", "4", "--synth-length", "5000",
                      "--synth-plant", "run", "--synth-run-direction", "down", "--synth-run-length",
                      "3", "--synth-drift", "0.01", "--seed", "3", "--out", out.string()}),
            0);
  auto table = read_csv(out / "patterns.csv");
  const auto dev = table.column("mean_dev_bp");
  bool found = false;
  for (const auto& row : table.rows) {
    if (row[0] != "Three Black Crows") continue;
    found = true;
    EXPECT_GT(std::stod(row[dev]), 0.0);
  }
  EXPECT_TRUE(found);
}

TEST_F(TrainedRun, ArtifactCardinalityAndHeaders) {
  const auto a = dir() / "a";
  for (const char* m : {"cnn-1", "cnn-2", "cnn-3", "ensemble"}) {
    const std::string name = m;
    auto sweep = read_csv(a / ("sweep_" + name + ".csv"));
    EXPECT_EQ(sweep.header, "alpha,decided,retention,accuracy");
    EXPECT_EQ(sweep.rows.size(), kSweepSteps);
    auto pred = read_csv(a / cli::predictions_file(name));
    EXPECT_EQ(pred.header, "split,symbol,date,p_neg,p_pos,confidence,decided,class,label,next_return");
  }
  for (const char* m : {"cnn-1", "cnn-2", "cnn-3"}) {
    auto epochs = read_csv(a / ("epochs_" + std::string(m) + ".csv"));
    EXPECT_EQ(epochs.header, "epoch,loss,train_accuracy,test_accuracy");
    EXPECT_EQ(epochs.rows.size(), 3u);
    EXPECT_TRUE(fs::exists(a / "models" / (std::string(m) + ".model")));
  }
  auto sig = read_csv(a / "significance.csv");
  EXPECT_EQ(sig.header, "model,n,accuracy,alpha,decided,decided_accuracy,auc,u,mu_u,sigma_u,z,significance");
  EXPECT_EQ(sig.rows.size(), 4u);
  auto manifest = read_csv(a / "manifest.csv");
  EXPECT_EQ(manifest.header, "model,seed,alpha,retain,target,decided,achieved_retention,config_digest");
}

TEST_F(TrainedRun, SweepAtHalfEqualsUnthresholdedAccuracy) {
  const auto a = dir() / "a";
  auto sig = read_csv(a / "significance.csv");
  for (const auto& row : sig.rows) {
    auto sweep = read_csv(a / ("sweep_" + row[0] + ".csv"));
    EXPECT_DOUBLE_EQ(std::stod(sweep.rows[0][0]), 0.5);
    EXPECT_EQ(std::stod(sweep.rows[0][3]), std::stod(row[sig.column("accuracy")])) << row[0];
  }
}

TEST_F(TrainedRun, SelectedAlphaRetainsTheTargetShare) {
  auto manifest = read_csv(dir() / "a" / "manifest.csv");
  for (const auto& row : manifest.rows) {
    const double retain = std::stod(row[manifest.column("retain")]);
    const double target = std::stod(row[manifest.column("target")]);
    const double decided = std::stod(row[manifest.column("decided")]);
    const double achieved = std::stod(row[manifest.column("achieved_retention")]);
    EXPECT_EQ(retain, 0.05);
    // Ties can only add points; otherwise exactly ceil(retain · N) are kept.
    EXPECT_GE(decided, target);
    EXPECT_NEAR(achieved, retain, (decided - target + 1) / (target / retain));
  }
}

TEST_F(TrainedRun, RerunIsByteIdentical) {
  const auto b = dir() / "b";
  ASSERT_EQ(cli::run(train_args(b)), 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir() / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir() / "a");
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 15u);
}

TEST_F(TrainedRun, PostHocCommandsReadPredictionFiles) {
  const auto a = dir() / "a";
  const auto out = dir() / "post";
  const std::vector<std::string> common = {"--predictions", a.string(), "--seed", "5",
                                           "--retain", "0.05", "--out", out.string()};
  ASSERT_EQ(run_with({"sweep", "--models", "cnn-1,cnn-2"}, common), 0);
  EXPECT_EQ(slurp(out / "sweep_cnn-2.csv").substr(slurp(out / "sweep_cnn-2.csv").find("alpha,")),
            slurp(a / "sweep_cnn-2.csv").substr(slurp(a / "sweep_cnn-2.csv").find("alpha,")));
  ASSERT_EQ(run_with({"ensemble"}, common), 0);
  auto mine = read_csv(out / cli::predictions_file("ensemble"));
  auto theirs = read_csv(a / cli::predictions_file("ensemble"));
  EXPECT_EQ(mine.rows, theirs.rows);
  ASSERT_EQ(run_with({"significance", "--models", "cnn-1,cnn-2,cnn-3,ensemble"}, common), 0);
  EXPECT_EQ(read_csv(out / "significance.csv").rows, read_csv(a / "significance.csv").rows);
  EXPECT_EQ(run_with({"backtest", "--models", "knn"}, common), 2);
}

TEST_F(TrainedRun, BacktestRowsAndBreakeven) {
  const auto a = dir() / "a";
  const auto out = dir() / "bt";
  ASSERT_EQ(cli::run({"backtest", "--predictions", a.string(), "--models", "cnn-1,ensemble",
                      "--costs", "0,0.001,0.0025", "--out", out.string()}),
            0);
  auto bt = read_csv(out / "backtest.csv");
  EXPECT_EQ(bt.header,
            "model,cost,trades,profit,cagr_pct,sharpe,max_drawdown,breakeven_cost,dropped");
  ASSERT_EQ(bt.rows.size(), 6u);
  auto equity = read_csv(out / "equity_cnn-1.csv");
  EXPECT_EQ(equity.header, "cost,date,daily_pnl,cumulative");
  EXPECT_EQ(read_csv(out / "activity_ensemble.csv").header, "date,buys,sells");

  const auto& row = bt.rows[0];
  const double trades = std::stod(row[bt.column("trades")]);
  ASSERT_GT(trades, 0.0);
  const std::string breakeven = row[bt.column("breakeven_cost")];
  if (std::stod(breakeven) >= 0.0) {
    const auto out2 = dir() / "bt_even";
    ASSERT_EQ(cli::run({"backtest", "--predictions", a.string(), "--models", "cnn-1", "--costs",
                        breakeven, "--out", out2.string()}),
              0);
    auto even = read_csv(out2 / "backtest.csv");
    EXPECT_NEAR(std::stod(even.rows[0][even.column("profit")]), 0.0, 1e-9);
  }
}

TEST_F(TrainedRun, ExportFiltersForCnn3) {
  const auto out = dir() / "filters";
  ASSERT_EQ(cli::run({"export-filters", "--model", (dir() / "a" / "models" / "cnn-3.model").string(),
                      "--out", out.string()}),
            0);
  auto filters = read_csv(out / "filters.csv");
  EXPECT_EQ(filters.rows.size(), 8u * 4u * 3u);
  const std::string svg = slurp(out / "hinton.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t grids = 0;
  for (auto p = svg.find("class=\"filter\""); p != std::string::npos;
       p = svg.find("class=\"filter\"", p + 1)) {
    ++grids;
  }
  EXPECT_EQ(grids, 8u);
  EXPECT_TRUE(fs::exists(out / "candles.svg"));
  EXPECT_TRUE(fs::exists(out / "hinton.txt"));
}

TEST(CliExportFilters, DenseModelIsUnsupported) {
  const auto out = test::scratch_dir("cli_mlp_filters");
  ASSERT_EQ(run_with({"train", "--models", "mlp", "--epochs", "1"}, synth_flags(out)), 0);
  EXPECT_EQ(cli::run({"export-filters", "--model", (out / "models" / "mlp.model").string(),
                      "--out", out.string()}),
            1);
}

TEST(CliConfig, FileValuesAndFlagOverrides) {
  const auto out = test::scratch_dir("cli_config");
  std::ofstream(out / "run.ini") << "seed = 9\nsynth-symbols = 1\nsynth-length = 120\n";
  ASSERT_EQ(cli::run({"synth", "--config", (out / "run.ini").string(), "--out", (out / "a").string()}), 0);
  auto info = read_csv(out / "a" / "synth_info.csv");
  EXPECT_EQ(info.comments[2], "# seed: 9");
  EXPECT_EQ(info.rows[1][1], "120");
  ASSERT_EQ(cli::run({"synth", "--config", (out / "run.ini").string(), "--synth-length", "90",
                      "--out", (out / "b").string()}),
            0);
  EXPECT_EQ(read_csv(out / "b" / "synth_info.csv").rows[1][1], "90");
}

TEST(Render, ZeroFilterDrawsNothing) {
  std::vector<double> w(2 * 4 * 3, 0.0);
  w[12] = 0.7;  // second filter, open row, first column
  w[15] = -0.2;
  auto grids = cli::filters_from_weights(w, 2, 3);
  ASSERT_EQ(grids.size(), 2u);
  EXPECT_EQ(grids[1].at(0, 0), 0.7);
  EXPECT_EQ(grids[1].at(1, 0), -0.2);
  const std::vector<cli::FilterGrid> zero = {grids[0]};
  const std::string svg = cli::hinton_svg(zero);
  EXPECT_EQ(svg.find("class=\"pos\""), std::string::npos);
  EXPECT_EQ(svg.find("class=\"neg\""), std::string::npos);
  const std::string both = cli::hinton_svg(grids);
  EXPECT_NE(both.find("class=\"pos\""), std::string::npos);
  EXPECT_NE(both.find("class=\"neg\""), std::string::npos);

  const std::string candles = cli::candles_svg(zero);
  std::size_t empty = 0;
  for (auto p = candles.find("candle empty"); p != std::string::npos;
       p = candles.find("candle empty", p + 1)) {
    ++empty;
  }
  EXPECT_EQ(empty, 3u);
}

TEST(Render, IncompatibleColumnsArePatches) {
  EXPECT_TRUE(cli::candle_glyph(0.0, 0.0, 0.0, 0.0).empty);
  EXPECT_TRUE(cli::candle_glyph(1.2, 0.1, -1.0, 1.0).incompatible);
  EXPECT_FALSE(cli::candle_glyph(0.5, 0.1, -1.0, 1.0).incompatible);
  // open > high in the middle column only.
  cli::FilterGrid g{3, {0.1, 1.5, 0.2,   0.3, 0.2, -0.1,  -0.5, -0.5, -0.5,  0.5, 0.5, 0.5}};
  const std::vector<cli::FilterGrid> one = {g};
  const std::string svg = cli::candles_svg(one);
  std::size_t patches = 0;
  for (auto p = svg.find("candle incompatible"); p != std::string::npos;
       p = svg.find("candle incompatible", p + 1)) {
    ++patches;
  }
  EXPECT_EQ(patches, 1u);
}
