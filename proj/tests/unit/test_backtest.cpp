#include "candlenet/backtest.hpp"
#include "candlenet/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

using namespace candlenet;

namespace {

TradeLog random_log(std::size_t n, std::size_t days, std::mt19937_64& rng) {
  std::normal_distribution<double> r(0.0005, 0.01);
  std::uniform_int_distribution<std::size_t> day(0, days - 1);
  std::bernoulli_distribution buy(0.55);
  TradeLog log;
  for (std::size_t i = 0; i < n; ++i) {
    log.trades.push_back({"S" + std::to_string(i % 7),
                          Date(2005, 1, 3) + static_cast<std::int32_t>(day(rng)),
                          buy(rng) ? Side::buy : Side::sell, r(rng)});
  }
  return log;
}

std::vector<Date> calendar(std::size_t days) {
  std::vector<Date> out;
  for (std::size_t i = 0; i < days; ++i) out.push_back(Date(2005, 1, 3) + static_cast<std::int32_t>(i));
  return out;
}

}  // namespace

TEST(Simulate, SingleTradeExamples) {
  TradeLog longs{{{"A", Date(2010, 1, 4), Side::buy, 0.02}}, 0};
  EXPECT_NEAR(simulate(longs, 0.0).profit, 0.02, 1e-15);
  TradeLog shorts{{{"A", Date(2010, 1, 4), Side::sell, 0.02}}, 0};
  auto r = simulate(shorts, 0.001);
  EXPECT_NEAR(r.profit, -0.021, 1e-15);
  ASSERT_EQ(r.days.size(), 1u);
  EXPECT_NEAR(r.days[0].pnl, -0.021, 1e-15);
  EXPECT_THROW(simulate(longs, -0.001), ParameterError);
}

TEST(Simulate, FrictionIsLinearInCost) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    auto log = random_log(50 + 40 * rep, 200, rng);
    const double base = simulate(log, 0.0).profit;
    for (double c : {0.0005, 0.001, 0.0025, 0.01}) {
      EXPECT_EQ(simulate(log, c).profit, base - c * static_cast<double>(log.trades.size()));
    }
  }
}

TEST(Simulate, PublishedFrictionArithmetic) {
  TradeLog log;
  const std::size_t n = 14087;
  for (std::size_t i = 0; i < n; ++i) {
    log.trades.push_back({"S", Date(2005, 1, 3) + static_cast<std::int32_t>(i % 2868), Side::buy,
                          48.2 / static_cast<double>(n)});
  }
  EXPECT_NEAR(simulate(log, 0.0).profit, 48.2, 1e-9);
  EXPECT_NEAR(simulate(log, 0.001).profit, 34.1, 0.05);
  EXPECT_NEAR(simulate(log, 0.0025).profit, 13.0, 0.05);
  EXPECT_NEAR(breakeven_cost(simulate(log, 0.0)) * 100.0, 0.342, 0.005);
}

TEST(Simulate, BreakevenCostZeroesProfit) {
  std::mt19937_64 rng(2);
  auto log = random_log(300, 100, rng);
  auto free = simulate(log, 0.0);
  const double c = breakeven_cost(free);
  if (c >= 0.0) {
    auto r = simulate(log, c);
    EXPECT_NEAR(r.profit, 0.0, 1e-9);
    EXPECT_NEAR(r.days.back().cumulative, 0.0, 1e-9);
  }
}

TEST(Simulate, CalendarCoversInactiveDays) {
  TradeLog log{{{"A", Date(2005, 1, 5), Side::buy, 0.01}}, 0};
  auto cal = calendar(5);
  auto r = simulate(log, 0.0, cal);
  ASSERT_EQ(r.days.size(), 5u);
  EXPECT_EQ(r.days[0].pnl, 0.0);
  EXPECT_EQ(r.days[2].pnl, 0.01);
  EXPECT_EQ(r.days[4].cumulative, 0.01);
}

TEST(Cagr, PublishedRows) {
  EXPECT_NEAR(cagr_percent(46.9, 11), 42.15, 0.01);
  EXPECT_NEAR(cagr_percent(36.9, 11), 39.16, 0.01);
  // The published 41.50 sits 0.019 below (1 + 44.6)^(1/11) - 1; it matches an
  // unrounded profit near 44.55.
  EXPECT_NEAR(cagr_percent(44.6, 11), 41.519, 0.001);
  EXPECT_NEAR(cagr_percent(48.2, 11), 42.50, 0.01);
  EXPECT_EQ(cagr_percent(0.0, 7.3), 0.0);
  EXPECT_THROW(cagr_percent(-1.0, 11), ParameterError);
  EXPECT_THROW(cagr_percent(1.0, 0.0), ParameterError);
}

TEST(Sharpe, Examples) {
  const std::vector<double> constant(20, 0.01);
  EXPECT_THROW(sharpe_ratio(constant), NumericError);
  std::vector<double> alternating;
  for (int i = 0; i < 20; ++i) alternating.push_back(i % 2 ? -0.01 : 0.01);
  EXPECT_NEAR(sharpe_ratio(alternating), 0.0, 1e-15);
  EXPECT_THROW(sharpe_ratio(std::vector<double>{0.1}), ParameterError);
}

TEST(Sharpe, TwoPassOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.001, 0.02);
  std::vector<double> x(777);
  for (double& v : x) v = z(rng);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double want = mean / std::sqrt(ss / static_cast<double>(x.size() - 1)) * std::sqrt(252.0);
  EXPECT_NEAR(sharpe_ratio(x), want, 1e-12);
}

TEST(Breakeven, Examples) {
  EXPECT_NEAR(breakeven_cost(48.2, 14087) * 100.0, 0.342, 0.005);
  EXPECT_EQ(breakeven_cost(0.0, 10), 0.0);
  EXPECT_DOUBLE_EQ(breakeven_cost(14.087, 14087), 0.001);
  EXPECT_THROW(breakeven_cost(1.0, 0), ParameterError);
}

TEST(Drawdown, BruteForceTwoIndexScan) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> curve;
    double c = 0.0;
    for (int i = 0; i < 300; ++i) curve.push_back(c += z(rng));
    // The curve starts from an implicit 0.
    std::vector<double> with_origin = {0.0};
    with_origin.insert(with_origin.end(), curve.begin(), curve.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < with_origin.size(); ++i) {
      for (std::size_t j = i; j < with_origin.size(); ++j) {
        worst = std::max(worst, with_origin[i] - with_origin[j]);
      }
    }
    const double dd = max_drawdown(curve);
    EXPECT_DOUBLE_EQ(dd, worst);
    EXPECT_GE(dd, 0.0);
    const auto [lo, hi] = std::minmax_element(with_origin.begin(), with_origin.end());
    EXPECT_LE(dd, *hi - *lo);
  }
  const std::vector<double> rising = {0.1, 0.2, 0.3};
  EXPECT_EQ(max_drawdown(rising), 0.0);
}

TEST(Activity, CountsPerDay) {
  const Date d(2006, 3, 1);
  TradeLog log{{{"A", d, Side::buy, 0.0},
                {"B", d, Side::buy, 0.0},
                {"C", d, Side::buy, 0.0},
                {"D", d, Side::sell, 0.0}},
               0};
  auto a = activity_series(log, std::vector<Date>{d});
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].buys, 3u);
  EXPECT_EQ(a[0].sells, 1u);

  auto cal = calendar(30);
  auto empty = activity_series(TradeLog{}, cal);
  ASSERT_EQ(empty.size(), 30u);
  for (const auto& day : empty) EXPECT_EQ(day.buys + day.sells, 0u);
}

TEST(Activity, GroupByOracle) {
  std::mt19937_64 rng(5);
  auto log = random_log(500, 40, rng);
  std::map<Date, std::pair<std::size_t, std::size_t>> oracle;
  for (const auto& t : log.trades) {
    auto& e = oracle[t.date];
    (t.side == Side::buy ? e.first : e.second) += 1;
  }
  auto cal = calendar(40);
  auto a = activity_series(log, cal);
  ASSERT_EQ(a.size(), 40u);
  for (const auto& day : a) {
    auto it = oracle.find(day.date);
    const auto want = it == oracle.end() ? std::pair<std::size_t, std::size_t>{0, 0} : it->second;
    EXPECT_EQ(day.buys, want.first);
    EXPECT_EQ(day.sells, want.second);
  }
}

TEST(Calendar, YearsFromDays) {
  EXPECT_NEAR(calendar_years(Date(2005, 1, 1), Date(2016, 1, 1)), 11.0, 0.01);
}
