#include "candlenet/matcher.hpp"

#include "candlenet/error.hpp"
#include "candlenet/standardize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace candlenet {

double similarity(std::span<const double> raw_window, const Template& tmpl) {
  if (raw_window.size() != tmpl.values().size()) {
    throw ParameterError("window and template " + tmpl.name() + " differ in shape");
  }
  std::vector<double> f(raw_window.begin(), raw_window.end());
  if (!standardize_in_place(f)) return 0.0;
  const auto t = tmpl.values();
  const double norm = frobenius_norm(t) * frobenius_norm(f);
  double dot = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) dot += t[i] * f[i];
  return std::clamp(dot / norm, -1.0, 1.0);
}

SimilaritySeries similarity_series(const PricePanel& panel, const Template& tmpl) {
  const std::size_t m = tmpl.length();
  SimilaritySeries out;
  out.pattern = tmpl.name();
  for (std::size_t s = 0; s < panel.series().size(); ++s) {
    const auto& series = panel.series()[s];
    out.symbols.push_back(series.symbol);
    for (std::size_t t = m - 1; t < series.bars.size(); ++t) {
      out.scores.push_back({s, series.bars[t].date, similarity(raw_window(series, t, m), tmpl)});
    }
  }
  if (out.scores.empty()) {
    throw ParameterError("template " + tmpl.name() + " is longer than every series");
  }
  return out;
}

namespace {

bool ranks_before(const ScoredAnchor& a, const ScoredAnchor& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.symbol_index != b.symbol_index) return a.symbol_index < b.symbol_index;
  return a.date < b.date;
}

std::size_t centile_count(double q, std::size_t n, bool& below_one) {
  const double want = q * static_cast<double>(n);
  below_one = want < 1.0;
  if (below_one) return 1;
  // Guard against q·N landing a hair above an integer (0.01 * 200).
  return std::min(n, static_cast<std::size_t>(std::ceil(want - 1e-9)));
}

void select_top(std::vector<ScoredAnchor>& pool, double q, MatchSet& out) {
  bool below_one = false;
  const std::size_t k = centile_count(q, pool.size(), below_one);
  out.below_one = out.below_one || below_one;
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(),
                    ranks_before);
  out.matches.insert(out.matches.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
}

void check_centile(double q, const SimilaritySeries& series) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("centile must lie in (0, 1)");
  if (series.scores.empty()) throw ParameterError("similarity series is empty");
}

}  // namespace

MatchSet top_centile_matches(const SimilaritySeries& series, double q) {
  check_centile(q, series);
  MatchSet out;
  out.pattern = series.pattern;
  out.centile = q;
  out.symbols = series.symbols;
  auto pool = series.scores;
  select_top(pool, q, out);
  out.threshold = out.matches.back().score;
  return out;
}

MatchSet top_centile_matches_per_symbol(const SimilaritySeries& series, double q) {
  check_centile(q, series);
  MatchSet out;
  out.pattern = series.pattern;
  out.centile = q;
  out.symbols = series.symbols;
  auto begin = series.scores.begin();
  while (begin != series.scores.end()) {
    auto end = std::find_if(begin, series.scores.end(), [&](const ScoredAnchor& a) {
      return a.symbol_index != begin->symbol_index;
    });
    std::vector<ScoredAnchor> pool(begin, end);
    select_top(pool, q, out);
    begin = end;
  }
  std::stable_sort(out.matches.begin(), out.matches.end(), ranks_before);
  out.threshold = out.matches.back().score;
  return out;
}

ConditionalSample conditional_returns(const MatchSet& matches, const ReturnSeries& returns) {
  ConditionalSample out;
  out.pattern = matches.pattern;
  out.returns.reserve(matches.matches.size());
  for (const auto& m : matches.matches) {
    if (auto r = returns.next_day_return(matches.symbol_of(m), m.date)) {
      out.returns.push_back(*r);
    } else {
      ++out.dropped;
    }
  }
  return out;
}

void write_matches_csv(std::ostream& out, const MatchSet& matches, const ReturnSeries& returns,
                       bool header) {
  if (header) out << "pattern,symbol,date,score,next_return_bp\n";
  char buf[64];
  for (const auto& m : matches.matches) {
    out << matches.pattern << ',' << matches.symbol_of(m) << ',' << m.date.iso() << ',';
    std::snprintf(buf, sizeof buf, "%.12f", m.score);
    out << buf << ',';
    if (auto r = returns.next_day_return(matches.symbol_of(m), m.date)) {
      std::snprintf(buf, sizeof buf, "%.6f", *r * 1e4);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace candlenet
