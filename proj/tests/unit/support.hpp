#pragma once

#include "candlenet/market_data.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace candlenet::test {

inline Bar bar(Date d, double open, double high, double low, double close) {
  return Bar{d, open, high, low, close};
}

// Random walk bars that satisfy the OHLC invariant.
inline SymbolSeries random_series(const std::string& symbol, std::size_t n, std::mt19937_64& rng,
                                  Date start = Date(2010, 1, 4)) {
  std::normal_distribution<double> z(0.0, 0.01);
  std::uniform_real_distribution<double> wick(0.0, 0.01);
  SymbolSeries s;
  s.symbol = symbol;
  double close = 100.0;
  Date d = start;
  for (std::size_t i = 0; i < n; ++i) {
    const double open = close * std::exp(z(rng));
    close = open * std::exp(z(rng));
    const double high = std::max(open, close) * (1.0 + wick(rng));
    const double low = std::min(open, close) * (1.0 - wick(rng));
    s.bars.push_back(bar(d, open, high, low, close));
    d = d + 1;
  }
  return s;
}

inline PricePanel random_panel(std::size_t symbols, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SymbolSeries> all;
  for (std::size_t i = 0; i < symbols; ++i) {
    all.push_back(random_series("S" + std::to_string(i), n, rng));
  }
  return PricePanel(std::move(all));
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("candlenet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace candlenet::test
