#pragma once

#include "candlenet/date.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace candlenet {

// Row order of every 4×m price matrix in the library (windows, templates,
// learned filters).
enum class PriceRow : std::size_t { open = 0, close = 1, low = 2, high = 3 };
inline constexpr std::size_t kPriceRows = 4;
inline constexpr std::size_t kDefaultWindowLength = 20;

struct Bar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;

  double row(PriceRow r) const;
};

// low <= min(open, close), high >= max(open, close), every price > 0.
bool satisfies_ohlc(const Bar& bar);

struct SymbolSeries {
  std::string symbol;
  std::vector<Bar> bars;
};

// Per-symbol dated OHLC series, sorted by symbol then date. Immutable after
// construction; the constructor enforces the OHLC, positivity and strictly
// increasing date invariants.
class PricePanel {
 public:
  PricePanel() = default;
  explicit PricePanel(std::vector<SymbolSeries> series);

  const std::vector<SymbolSeries>& series() const { return series_; }
  std::size_t symbol_count() const { return series_.size(); }
  std::size_t bar_count() const;
  const SymbolSeries* find(std::string_view symbol) const;
  bool empty() const { return series_.empty(); }

  // Earliest and latest bar dates across all symbols.
  Date first_date() const;
  Date last_date() const;

 private:
  std::vector<SymbolSeries> series_;
};

// Column names used to locate the OHLC fields in a CSV header.
struct CsvSchema {
  std::string date = "date";
  std::string symbol = "symbol";
  std::string open = "open";
  std::string high = "high";
  std::string low = "low";
  std::string close = "close";
};

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

struct LoadResult {
  PricePanel panel;
  std::vector<RejectedRow> rejected;
};

// Lines starting with '#' are comments (artifact metadata headers). Rows that
// parse but violate the OHLC invariant, or duplicate a (symbol, date), are
// rejected and reported. Unparsable rows raise RowError after the whole file is
// scanned; a missing column raises SchemaError; no data rows raises
// EmptyInputError.
LoadResult load_ohlc_csv(const std::string& path, const CsvSchema& schema = {});
LoadResult parse_ohlc_csv(std::istream& in, const CsvSchema& schema = {});

// Writes date,symbol,open,high,low,close with round-trip precision.
void write_ohlc_csv(std::ostream& out, const PricePanel& panel);

// ---------------------------------------------------------------------------
// Returns and labels
// ---------------------------------------------------------------------------

struct DatedReturn {
  Date date;  // date of the later bar
  double value = 0.0;
};

struct SymbolReturns {
  std::string symbol;
  std::vector<DatedReturn> returns;
};

struct ReturnSeries {
  std::vector<SymbolReturns> series;
  std::vector<std::string> excluded;  // symbols with fewer than two bars

  const SymbolReturns* find(std::string_view symbol) const;
  // Return realized on the bar after `anchor`, if the symbol has one.
  std::optional<double> next_day_return(std::string_view symbol, Date anchor) const;
  std::vector<double> pooled() const;
};

// Close-to-close simple returns: close(t) / close(t-1) - 1.
ReturnSeries compute_returns(const PricePanel& panel);

enum class ReturnClass : std::uint8_t { negative = 0, positive = 1 };

inline constexpr double kLabelNoiseVariance = 1e-6;

// positive iff ret + g > 0 with g ~ N(0, kLabelNoiseVariance) drawn from a
// generator keyed by (seed, symbol, date).
ReturnClass label_return(double ret, std::uint64_t seed, std::string_view symbol, Date date);

struct DatedLabel {
  Date date;
  ReturnClass label = ReturnClass::negative;
  double next_return = 0.0;
};

struct SymbolLabels {
  std::string symbol;
  std::vector<DatedLabel> labels;

  const DatedLabel* find(Date date) const;
};

using LabelSeries = std::vector<SymbolLabels>;

LabelSeries label_returns(const ReturnSeries& returns, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Windows
// ---------------------------------------------------------------------------

struct DateRange {
  Date first;
  Date last;

  bool contains(Date d) const { return first <= d && d <= last; }
  bool overlaps(const DateRange& other) const {
    return first <= other.last && other.first <= last;
  }
};

struct SplitConfig {
  DateRange train;
  DateRange test;
  std::size_t window_length = kDefaultWindowLength;
  std::uint64_t noise_seed = 0;

  // Ranges ordered and disjoint; window_length > longest built-in template.
  void validate() const;
};

struct LabeledWindow {
  std::vector<double> values;  // 4 × window_length, row-major (PriceRow order)
  ReturnClass label = ReturnClass::negative;
  std::string symbol;
  Date anchor;
  double next_return = 0.0;
  bool degenerate = false;
};

struct WindowSet {
  std::size_t window_length = kDefaultWindowLength;
  std::vector<LabeledWindow> windows;

  std::size_t size() const { return windows.size(); }
  bool empty() const { return windows.empty(); }
  std::size_t degenerate_count() const;
};

struct WindowSplit {
  WindowSet train;
  WindowSet test;
};

// Raw 4×length matrix of the bars ending at `end_index` (inclusive).
std::vector<double> raw_window(const SymbolSeries& series, std::size_t end_index,
                               std::size_t length);

// One window per (symbol, anchor index t) with t >= window_length bars of
// history before it and a labelled next bar. A window belongs to the split
// whose range contains both its anchor date and its label date; windows
// straddling a boundary are dropped. Output is ordered by (symbol, anchor).
WindowSplit make_windows(const PricePanel& panel, const LabelSeries& labels,
                         const SplitConfig& config);

// Splits by anchor date: the last `tail_fraction` of distinct anchor dates go
// to the second set. Used to carve a validation slice out of a training range.
std::pair<WindowSet, WindowSet> split_tail(const WindowSet& set, double tail_fraction);

// ---------------------------------------------------------------------------
// Synthetic panels
// ---------------------------------------------------------------------------

enum class PlantKind {
  none,
  // After `run_length` consecutive close-to-close moves in `run_direction`,
  // the next day's log return gets `drift` added.
  run,
  // The next day's log return gets -drift * sign(close - open) of the
  // current bar: a one-candle reversal.
  body_reversal,
  // The next day's log return gets -drift * log(close / open) of the current
  // bar: the reversal grows with the body, so some days are far more
  // predictable than others.
  scaled_reversal,
};

struct PlantedSignal {
  PlantKind kind = PlantKind::none;
  int run_length = 3;
  int run_direction = 1;  // +1 up-closes, -1 down-closes
  double drift = 0.005;
};

struct SyntheticSpec {
  std::size_t symbols = 1;
  std::size_t length = 250;
  double volatility = 0.01;  // std of the daily close-to-close log return
  std::uint64_t seed = 0;
  double start_price = 100.0;
  Date start_date = Date(2000, 1, 3);
  PlantedSignal plant;

  void validate() const;
};

struct SyntheticPanel {
  PricePanel panel;
  // Accuracy of the classifier that knows each day's planted drift, averaged
  // over all labelled days: mean of Phi(|drift_t| / volatility).
  double bayes_accuracy = 0.5;
};

// Geometric random walk on business days (weekends skipped). Each symbol draws
// from its own generator keyed by (seed, symbol index).
SyntheticPanel generate_synthetic(const SyntheticSpec& spec);

// Parses flat "key = value" lines: symbols, length, volatility, seed,
// start_price, start_date, plant (none|run|body_reversal|scaled_reversal),
// run_length, run_direction (up|down), drift. '#' starts a comment.
SyntheticSpec parse_synthetic_spec(std::istream& in);
void apply_synthetic_setting(SyntheticSpec& spec, std::string_view key, std::string_view value);

}  // namespace candlenet
