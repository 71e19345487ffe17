#pragma once

#include "candlenet/date.hpp"
#include "candlenet/market_data.hpp"
#include "candlenet/models.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace candlenet {

enum class Side { buy, sell };

struct Trade {
  std::string symbol;
  Date date;  // anchor date; the position is held over the next bar
  Side side = Side::buy;
  double next_return = 0.0;  // fraction
};

struct TradeLog {
  std::vector<Trade> trades;
  std::size_t dropped = 0;  // decided points without a next-day return
};

// One trade per decided point: positive class buys, negative class sells.
// `returns` supplies the realized next-day return; points it cannot price are
// dropped and counted.
TradeLog make_trade_log(const PredictionSet& predictions, const ThresholdedPrediction& decisions,
                        const ReturnSeries& returns);
// Same, taking the realized return stored with each prediction.
TradeLog make_trade_log(const PredictionSet& predictions, const ThresholdedPrediction& decisions);

struct DailyRecord {
  Date date;
  double pnl = 0.0;
  double cumulative = 0.0;
  std::size_t buys = 0;
  std::size_t sells = 0;
};

struct BacktestReport {
  double cost = 0.0;  // per trade, fraction of unit notional
  std::size_t trades = 0;
  double gross_profit = 0.0;  // frictionless
  double profit = 0.0;        // gross_profit - cost · trades
  double max_drawdown = 0.0;
  std::vector<DailyRecord> days;  // calendar order
};

// Every trade commits one unit of starting wealth for one day: pnl = +r - cost
// for buys and -r - cost for sells; profit is the plain sum. `calendar` lists
// the days to report (trades on other days are added in date order).
BacktestReport simulate(const TradeLog& log, double cost, std::span<const Date> calendar = {});

// (1 + profit)^(1/years) - 1, in percent.
double cagr_percent(double profit, double years);

// mean / sample std of the series, times sqrt(periods_per_year).
double sharpe_ratio(std::span<const double> pnl, int periods_per_year = 252);

// Cost per trade at which profit reaches zero.
double breakeven_cost(double gross_profit, std::size_t trades);
double breakeven_cost(const BacktestReport& frictionless);

// Largest drop of a cumulative curve from its running peak; the curve starts
// from an implicit 0.
double max_drawdown(std::span<const double> cumulative);

struct ActivityDay {
  Date date;
  std::size_t buys = 0;
  std::size_t sells = 0;
};

std::vector<ActivityDay> activity_series(const TradeLog& log, std::span<const Date> calendar);

// Years between two dates, counted as days / 365.25.
double calendar_years(Date first, Date last);

}  // namespace candlenet
