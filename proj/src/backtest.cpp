#include "candlenet/backtest.hpp"

#include "candlenet/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace candlenet {

namespace {

Trade to_trade(const PredictionKey& key, const ThresholdedPoint& point, double r) {
  return {key.symbol, key.date, point.cls == ReturnClass::positive ? Side::buy : Side::sell, r};
}

void check_sizes(const PredictionSet& p, const ThresholdedPrediction& d) {
  if (p.size() != d.points.size()) throw ShapeError("decisions do not match predictions");
}

}  // namespace

TradeLog make_trade_log(const PredictionSet& predictions, const ThresholdedPrediction& decisions,
                        const ReturnSeries& returns) {
  check_sizes(predictions, decisions);
  TradeLog log;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!decisions.points[i].decided) continue;
    const auto& key = predictions.keys[i];
    const auto r = returns.next_day_return(key.symbol, key.date);
    if (!r) {
      ++log.dropped;
      continue;
    }
    log.trades.push_back(to_trade(key, decisions.points[i], *r));
  }
  return log;
}

TradeLog make_trade_log(const PredictionSet& predictions, const ThresholdedPrediction& decisions) {
  check_sizes(predictions, decisions);
  TradeLog log;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!decisions.points[i].decided) continue;
    const double r = predictions.next_returns.at(i);
    if (!std::isfinite(r)) {
      ++log.dropped;
      continue;
    }
    log.trades.push_back(to_trade(predictions.keys[i], decisions.points[i], r));
  }
  return log;
}

BacktestReport simulate(const TradeLog& log, double cost, std::span<const Date> calendar) {
  if (!(cost >= 0.0) || !std::isfinite(cost)) throw ParameterError("cost must be non-negative");
  std::map<Date, DailyRecord> days;
  for (Date d : calendar) days[d].date = d;
  BacktestReport rep;
  rep.cost = cost;
  rep.trades = log.trades.size();
  for (const auto& t : log.trades) {
    auto& day = days[t.date];
    day.date = t.date;
    const double signed_return = t.side == Side::buy ? t.next_return : -t.next_return;
    day.pnl += signed_return - cost;
    rep.gross_profit += signed_return;
    (t.side == Side::buy ? day.buys : day.sells) += 1;
  }
  rep.profit = rep.gross_profit - cost * static_cast<double>(rep.trades);
  double running = 0.0;
  std::vector<double> curve;
  for (auto& [date, rec] : days) {
    running += rec.pnl;
    rec.cumulative = running;
    curve.push_back(running);
    rep.days.push_back(rec);
  }
  rep.max_drawdown = max_drawdown(curve);
  return rep;
}

double cagr_percent(double profit, double years) {
  if (!(profit > -1.0)) throw ParameterError("CAGR undefined for profit <= -1");
  if (!(years > 0.0)) throw ParameterError("CAGR needs a positive number of years");
  return (std::pow(1.0 + profit, 1.0 / years) - 1.0) * 100.0;
}

double sharpe_ratio(std::span<const double> pnl, int periods_per_year) {
  if (pnl.size() < 2) throw ParameterError("Sharpe ratio needs at least two periods");
  if (periods_per_year < 1) throw ParameterError("periods per year must be positive");
  double mean = 0.0;
  for (double x : pnl) mean += x;
  mean /= static_cast<double>(pnl.size());
  double ss = 0.0;
  for (double x : pnl) ss += (x - mean) * (x - mean);
  const auto [lo, hi] = std::minmax_element(pnl.begin(), pnl.end());
  // A constant series leaves rounding residue in ss; test equality instead.
  if (*lo == *hi) throw NumericError("Sharpe ratio undefined: zero variance", 0);
  const double sd = std::sqrt(ss / static_cast<double>(pnl.size() - 1));
  if (!std::isfinite(sd)) throw NumericError("Sharpe ratio undefined: non-finite variance", 0);
  return mean / sd * std::sqrt(static_cast<double>(periods_per_year));
}

double breakeven_cost(double gross_profit, std::size_t trades) {
  if (trades == 0) throw ParameterError("breakeven cost undefined without trades");
  return gross_profit / static_cast<double>(trades);
}

double breakeven_cost(const BacktestReport& frictionless) {
  return breakeven_cost(frictionless.gross_profit, frictionless.trades);
}

double max_drawdown(std::span<const double> cumulative) {
  double peak = 0.0, worst = 0.0;
  for (double v : cumulative) {
    peak = std::max(peak, v);
    worst = std::max(worst, peak - v);
  }
  return worst;
}

std::vector<ActivityDay> activity_series(const TradeLog& log, std::span<const Date> calendar) {
  std::map<Date, ActivityDay> days;
  for (Date d : calendar) days[d].date = d;
  for (const auto& t : log.trades) {
    auto& day = days[t.date];
    day.date = t.date;
    (t.side == Side::buy ? day.buys : day.sells) += 1;
  }
  std::vector<ActivityDay> out;
  out.reserve(days.size());
  for (const auto& [d, rec] : days) out.push_back(rec);
  return out;
}

double calendar_years(Date first, Date last) {
  return static_cast<double>(last - first) / 365.25;
}

}  // namespace candlenet
