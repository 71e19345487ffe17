#pragma once

#include "candlenet/market_data.hpp"
#include "candlenet/patterns.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace candlenet {

struct ScoredAnchor {
  std::size_t symbol_index = 0;  // index into SimilaritySeries::symbols
  Date date;
  double score = 0.0;
};

// Normalized cross-correlation of one template against every complete
// m-bar window of a panel, ordered by (symbol, date).
struct SimilaritySeries {
  std::string pattern;
  std::vector<std::string> symbols;  // sorted, as in the panel
  std::vector<ScoredAnchor> scores;

  const std::string& symbol_of(const ScoredAnchor& a) const { return symbols[a.symbol_index]; }
};

// <T/|T|, F/|F|> with F the standardized raw window (Frobenius norms), clamped
// to [-1, 1]. A degenerate (constant) window scores 0.
double similarity(std::span<const double> raw_window, const Template& tmpl);

// Throws ParameterError when the template is longer than every series.
SimilaritySeries similarity_series(const PricePanel& panel, const Template& tmpl);

struct MatchSet {
  std::string pattern;
  double centile = 0.01;
  std::vector<std::string> symbols;
  std::vector<ScoredAnchor> matches;  // ordered by descending score
  double threshold = 0.0;              // lowest member score
  bool below_one = false;              // q·N < 1: single best match returned

  const std::string& symbol_of(const ScoredAnchor& a) const { return symbols[a.symbol_index]; }
};

// The ceil(q·N) highest scores pooled over the whole panel. Ties at the
// threshold are broken by (symbol, date) ascending.
MatchSet top_centile_matches(const SimilaritySeries& series, double q);

// Same selection applied to each symbol separately, then concatenated.
MatchSet top_centile_matches_per_symbol(const SimilaritySeries& series, double q);

struct ConditionalSample {
  std::string pattern;
  std::vector<double> returns;  // fractions, in match order
  std::size_t dropped = 0;      // matches without a next-day return
};

ConditionalSample conditional_returns(const MatchSet& matches, const ReturnSeries& returns);

// pattern,symbol,date,score,next_return_bp (empty when no next-day return).
void write_matches_csv(std::ostream& out, const MatchSet& matches, const ReturnSeries& returns,
                       bool header = true);

}  // namespace candlenet
