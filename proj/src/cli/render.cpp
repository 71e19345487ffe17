#include "candlenet/cli/render.hpp"

#include "candlenet/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace candlenet::cli {

namespace {

constexpr std::size_t kRows = 4;
constexpr const char* kRowNames[kRows] = {"open", "close", "low", "high"};
constexpr double kCell = 24.0;
constexpr double kGap = 16.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

double max_abs(std::span<const FilterGrid> filters) {
  double m = 0.0;
  for (const auto& f : filters) {
    for (double w : f.weights) m = std::max(m, std::abs(w));
  }
  return m;
}

}  // namespace

std::vector<FilterGrid> filters_from_weights(std::span<const double> weights, std::size_t filters,
                                             std::size_t width) {
  if (weights.size() != filters * kRows * width) throw ShapeError("filter weights have wrong size");
  std::vector<FilterGrid> out;
  for (std::size_t f = 0; f < filters; ++f) {
    FilterGrid g;
    g.cols = width;
    g.weights.assign(weights.begin() + static_cast<std::ptrdiff_t>(f * kRows * width),
                     weights.begin() + static_cast<std::ptrdiff_t>((f + 1) * kRows * width));
    out.push_back(std::move(g));
  }
  return out;
}

std::string hinton_svg(std::span<const FilterGrid> filters) {
  const double scale = max_abs(filters);
  const std::size_t cols = filters.empty() ? 0 : filters.front().cols;
  const double grid_w = static_cast<double>(cols) * kCell;
  const double grid_h = kRows * kCell;
  const double width = kGap + static_cast<double>(filters.size()) * (grid_w + kGap);
  const double height = grid_h + 2 * kGap + 12.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\">\n";
  for (std::size_t f = 0; f < filters.size(); ++f) {
    const double x0 = kGap + static_cast<double>(f) * (grid_w + kGap);
    const double y0 = kGap;
    os << "<g class=\"filter\" id=\"filter-" << f << "\">\n";
    os << "<rect class=\"frame\" x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\""
       << num(grid_w) << "\" height=\"" << num(grid_h) << "\" fill=\"#808080\"/>\n";
    for (std::size_t r = 0; r < kRows; ++r) {
      for (std::size_t c = 0; c < filters[f].cols; ++c) {
        const double w = filters[f].at(r, c);
        if (w == 0.0 || scale == 0.0) continue;
        const double side = kCell * 0.9 * std::sqrt(std::abs(w) / scale);
        const double cx = x0 + (static_cast<double>(c) + 0.5) * kCell;
        const double cy = y0 + (static_cast<double>(r) + 0.5) * kCell;
        os << "<rect class=\"" << (w > 0 ? "pos" : "neg") << "\" x=\"" << num(cx - side / 2)
           << "\" y=\"" << num(cy - side / 2) << "\" width=\"" << num(side) << "\" height=\""
           << num(side) << "\" fill=\"" << (w > 0 ? "#ffffff" : "#000000") << "\"><title>"
           << kRowNames[r] << " t-" << (filters[f].cols - 1 - c) << ": " << num(w)
           << "</title></rect>\n";
      }
    }
    os << "<text x=\"" << num(x0) << "\" y=\"" << num(y0 + grid_h + 12.0)
       << "\" font-size=\"10\">filter " << f << "</text>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string hinton_text(std::span<const FilterGrid> filters) {
  std::ostringstream os;
  for (std::size_t f = 0; f < filters.size(); ++f) {
    os << "filter " << f << '\n';
    for (std::size_t r = 0; r < kRows; ++r) {
      char label[8];
      std::snprintf(label, sizeof label, "%-6s", kRowNames[r]);
      os << label;
      for (std::size_t c = 0; c < filters[f].cols; ++c) {
        char cell[24];
        std::snprintf(cell, sizeof cell, " %+8.4f", filters[f].at(r, c));
        os << cell;
      }
      os << '\n';
    }
    os << '\n';
  }
  return os.str();
}

CandleGlyph candle_glyph(double open, double close, double low, double high) {
  CandleGlyph g{open, close, low, high, false, false};
  g.empty = open == 0.0 && close == 0.0 && low == 0.0 && high == 0.0;
  g.incompatible = !g.empty && (std::min(open, close) < low || std::max(open, close) > high ||
                                low > high);
  return g;
}

std::string candles_svg(std::span<const FilterGrid> filters) {
  constexpr double kPanelH = 120.0;
  constexpr double kCandleW = 30.0;
  double range = 0.0;
  for (const auto& f : filters) {
    for (double w : f.weights) range = std::max(range, std::abs(w));
  }
  if (range == 0.0) range = 1.0;
  const std::size_t cols = filters.empty() ? 0 : filters.front().cols;
  const double panel_w = static_cast<double>(cols) * kCandleW + kGap;
  const double width = kGap + static_cast<double>(filters.size()) * (panel_w + kGap);
  const double height = kPanelH + 2 * kGap + 12.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\">\n";
  os << "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">"
        "<path d=\"M0,6 L6,0\" stroke=\"#c03030\" stroke-width=\"1\"/></pattern></defs>\n";
  for (std::size_t f = 0; f < filters.size(); ++f) {
    const double x0 = kGap + static_cast<double>(f) * (panel_w + kGap);
    const double mid = kGap + kPanelH / 2;
    auto y = [&](double v) { return mid - v / range * (kPanelH / 2); };
    os << "<g class=\"filter\" id=\"filter-" << f << "\">\n";
    for (std::size_t c = 0; c < filters[f].cols; ++c) {
      const auto& w = filters[f];
      const auto g = candle_glyph(w.at(0, c), w.at(1, c), w.at(2, c), w.at(3, c));
      const double cx = x0 + kGap / 2 + (static_cast<double>(c) + 0.5) * kCandleW;
      if (g.empty) {
        os << "<g class=\"candle empty\"/>\n";
        continue;
      }
      const double top = std::max({g.open, g.close, g.low, g.high});
      const double bottom = std::min({g.open, g.close, g.low, g.high});
      if (g.incompatible) {
        os << "<g class=\"candle incompatible\"><rect x=\"" << num(cx - kCandleW * 0.4)
           << "\" y=\"" << num(y(top)) << "\" width=\"" << num(kCandleW * 0.8) << "\" height=\""
           << num(std::max(1.0, y(bottom) - y(top)))
           << "\" fill=\"url(#hatch)\" stroke=\"#c03030\"/></g>\n";
        continue;
      }
      const bool rising = g.close > g.open;
      const double body_top = y(std::max(g.open, g.close));
      const double body_h = std::max(1.0, y(std::min(g.open, g.close)) - body_top);
      os << "<g class=\"candle\"><line x1=\"" << num(cx) << "\" y1=\"" << num(y(g.high))
         << "\" x2=\"" << num(cx) << "\" y2=\"" << num(y(g.low)) << "\" stroke=\"#000000\"/>"
         << "<rect x=\"" << num(cx - kCandleW * 0.3) << "\" y=\"" << num(body_top) << "\" width=\""
         << num(kCandleW * 0.6) << "\" height=\"" << num(body_h) << "\" fill=\""
         << (rising ? "#ffffff" : "#000000") << "\" stroke=\"#000000\"/></g>\n";
    }
    os << "<text x=\"" << num(x0) << "\" y=\"" << num(kGap + kPanelH + 12.0)
       << "\" font-size=\"10\">filter " << f << "</text>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace candlenet::cli
