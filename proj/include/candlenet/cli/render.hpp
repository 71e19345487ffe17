#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace candlenet::cli {

// One 4×m convolution filter, rows in (open, close, low, high) order.
struct FilterGrid {
  std::size_t cols = 0;
  std::vector<double> weights;  // 4 × cols, row-major

  double at(std::size_t row, std::size_t col) const { return weights[row * cols + col]; }
};

// Filters of the first conv layer of a weight tensor [filters, 4, m].
std::vector<FilterGrid> filters_from_weights(std::span<const double> weights, std::size_t filters,
                                             std::size_t width);

// Hinton diagram: one grid per filter, square area proportional to |w| / max|w|
// over all filters, white for positive and black for negative weights. Zero
// weights draw nothing.
std::string hinton_svg(std::span<const FilterGrid> filters);
std::string hinton_text(std::span<const FilterGrid> filters);

struct CandleGlyph {
  double open = 0.0, close = 0.0, low = 0.0, high = 0.0;
  bool empty = false;         // every value zero
  bool incompatible = false;  // open or close outside [low, high]
};

CandleGlyph candle_glyph(double open, double close, double low, double high);

// Each filter column read as a standardized candle. Incompatible columns are
// drawn as hatched patches instead of candles.
std::string candles_svg(std::span<const FilterGrid> filters);

}  // namespace candlenet::cli
