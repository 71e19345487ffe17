#include "candlenet/market_data.hpp"

#include "candlenet/error.hpp"
#include "candlenet/hash.hpp"
#include "candlenet/standardize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

namespace candlenet {

double Bar::row(PriceRow r) const {
  switch (r) {
    case PriceRow::open: return open;
    case PriceRow::close: return close;
    case PriceRow::low: return low;
    case PriceRow::high: return high;
  }
  return 0.0;
}

bool satisfies_ohlc(const Bar& bar) {
  if (!(bar.open > 0.0 && bar.high > 0.0 && bar.low > 0.0 && bar.close > 0.0)) return false;
  return bar.low <= std::min(bar.open, bar.close) && bar.high >= std::max(bar.open, bar.close);
}

PricePanel::PricePanel(std::vector<SymbolSeries> series) : series_(std::move(series)) {
  std::sort(series_.begin(), series_.end(),
            [](const SymbolSeries& a, const SymbolSeries& b) { return a.symbol < b.symbol; });
  for (std::size_t i = 0; i < series_.size(); ++i) {
    const auto& s = series_[i];
    if (i > 0 && series_[i - 1].symbol == s.symbol) {
      throw DataError("duplicate symbol in panel: " + s.symbol);
    }
    for (std::size_t j = 0; j < s.bars.size(); ++j) {
      if (!satisfies_ohlc(s.bars[j])) {
        throw DataError("OHLC invariant violated for " + s.symbol + " on " + s.bars[j].date.iso());
      }
      if (j > 0 && !(s.bars[j - 1].date < s.bars[j].date)) {
        throw DataError("dates not strictly increasing for " + s.symbol + " at " +
                        s.bars[j].date.iso());
      }
    }
  }
}

std::size_t PricePanel::bar_count() const {
  std::size_t n = 0;
  for (const auto& s : series_) n += s.bars.size();
  return n;
}

const SymbolSeries* PricePanel::find(std::string_view symbol) const {
  auto it = std::lower_bound(series_.begin(), series_.end(), symbol,
                             [](const SymbolSeries& s, std::string_view v) { return s.symbol < v; });
  if (it == series_.end() || it->symbol != symbol) return nullptr;
  return &*it;
}

Date PricePanel::first_date() const {
  std::optional<Date> best;
  for (const auto& s : series_) {
    if (!s.bars.empty() && (!best || s.bars.front().date < *best)) best = s.bars.front().date;
  }
  if (!best) throw DataError("panel has no bars");
  return *best;
}

Date PricePanel::last_date() const {
  std::optional<Date> best;
  for (const auto& s : series_) {
    if (!s.bars.empty() && (!best || *best < s.bars.back().date)) best = s.bars.back().date;
  }
  if (!best) throw DataError("panel has no bars");
  return *best;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

struct PendingBar {
  Bar bar;
  std::size_t line;
};

}  // namespace

LoadResult load_ohlc_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_ohlc_csv(in, schema);
}

LoadResult parse_ohlc_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t col_date = 0, col_symbol = 0, col_open = 0, col_high = 0, col_low = 0, col_close = 0;
  std::size_t width = 0;

  std::map<std::string, std::vector<PendingBar>> by_symbol;
  LoadResult result;
  std::size_t data_rows = 0;
  std::size_t bad_rows = 0;
  std::size_t first_bad_line = 0;
  std::string first_bad_detail;

  auto note_bad = [&](const std::string& detail) {
    if (bad_rows++ == 0) {
      first_bad_line = line_no;
      first_bad_detail = detail;
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split_fields(view);
    if (!have_header) {
      std::vector<std::string> missing;
      auto locate = [&](const std::string& name, std::size_t& col) {
        auto it = std::find(fields.begin(), fields.end(), name);
        if (it == fields.end()) {
          missing.push_back(name);
        } else {
          col = static_cast<std::size_t>(it - fields.begin());
        }
      };
      locate(schema.date, col_date);
      locate(schema.symbol, col_symbol);
      locate(schema.open, col_open);
      locate(schema.high, col_high);
      locate(schema.low, col_low);
      locate(schema.close, col_close);
      if (!missing.empty()) {
        std::string msg = "missing column(s):";
        for (const auto& m : missing) msg += " " + m;
        throw SchemaError(msg);
      }
      width = std::max({col_date, col_symbol, col_open, col_high, col_low, col_close}) + 1;
      have_header = true;
      continue;
    }

    ++data_rows;
    if (fields.size() < width) {
      note_bad("expected at least " + std::to_string(width) + " fields");
      continue;
    }
    const auto date = Date::parse(fields[col_date]);
    if (!date) {
      note_bad("bad date '" + std::string(fields[col_date]) + "'");
      continue;
    }
    if (fields[col_symbol].empty()) {
      note_bad("empty symbol");
      continue;
    }
    Bar bar;
    bar.date = *date;
    if (!parse_double(fields[col_open], bar.open) || !parse_double(fields[col_high], bar.high) ||
        !parse_double(fields[col_low], bar.low) || !parse_double(fields[col_close], bar.close)) {
      note_bad("bad price field");
      continue;
    }
    if (!satisfies_ohlc(bar)) {
      result.rejected.push_back({line_no, "OHLC invariant violated"});
      continue;
    }
    by_symbol[std::string(fields[col_symbol])].push_back({bar, line_no});
  }

  if (!have_header || data_rows == 0) throw EmptyInputError("no data rows");
  if (bad_rows > 0) throw RowError(bad_rows, first_bad_line, first_bad_detail);

  std::vector<SymbolSeries> series;
  series.reserve(by_symbol.size());
  for (auto& [symbol, pending] : by_symbol) {
    std::stable_sort(pending.begin(), pending.end(),
                     [](const PendingBar& a, const PendingBar& b) { return a.bar.date < b.bar.date; });
    SymbolSeries s;
    s.symbol = symbol;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (!s.bars.empty() && s.bars.back().date == pending[i].bar.date) {
        result.rejected.push_back({pending[i].line, "duplicate (symbol, date)"});
        continue;
      }
      s.bars.push_back(pending[i].bar);
    }
    series.push_back(std::move(s));
  }
  std::sort(result.rejected.begin(), result.rejected.end(),
            [](const RejectedRow& a, const RejectedRow& b) { return a.line < b.line; });
  result.panel = PricePanel(std::move(series));
  return result;
}

void write_ohlc_csv(std::ostream& out, const PricePanel& panel) {
  out << "date,symbol,open,high,low,close\n";
  char buf[160];
  for (const auto& s : panel.series()) {
    for (const auto& b : s.bars) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g\n", b.open, b.high, b.low, b.close);
      out << b.date.iso() << ',' << s.symbol << buf;
    }
  }
}

// ---------------------------------------------------------------------------
// Returns and labels
// ---------------------------------------------------------------------------

const SymbolReturns* ReturnSeries::find(std::string_view symbol) const {
  auto it = std::lower_bound(series.begin(), series.end(), symbol,
                             [](const SymbolReturns& s, std::string_view v) { return s.symbol < v; });
  if (it == series.end() || it->symbol != symbol) return nullptr;
  return &*it;
}

std::optional<double> ReturnSeries::next_day_return(std::string_view symbol, Date anchor) const {
  const auto* s = find(symbol);
  if (s == nullptr) return std::nullopt;
  const auto& r = s->returns;
  auto it = std::upper_bound(r.begin(), r.end(), anchor,
                             [](Date d, const DatedReturn& x) { return d < x.date; });
  if (it == r.end()) return std::nullopt;
  // The anchor must itself be a bar: either the first bar or a return date.
  if (it != r.begin() && std::prev(it)->date != anchor) return std::nullopt;
  return it->value;
}

std::vector<double> ReturnSeries::pooled() const {
  std::vector<double> out;
  for (const auto& s : series) {
    for (const auto& r : s.returns) out.push_back(r.value);
  }
  return out;
}

ReturnSeries compute_returns(const PricePanel& panel) {
  ReturnSeries out;
  for (const auto& s : panel.series()) {
    if (s.bars.size() < 2) {
      out.excluded.push_back(s.symbol);
      continue;
    }
    SymbolReturns r;
    r.symbol = s.symbol;
    r.returns.reserve(s.bars.size() - 1);
    for (std::size_t i = 1; i < s.bars.size(); ++i) {
      r.returns.push_back({s.bars[i].date, s.bars[i].close / s.bars[i - 1].close - 1.0});
    }
    out.series.push_back(std::move(r));
  }
  return out;
}

ReturnClass label_return(double ret, std::uint64_t seed, std::string_view symbol, Date date) {
  const std::uint64_t key =
      mix64(seed ^ mix64(fnv1a(symbol)) ^ mix64(static_cast<std::uint64_t>(date.days()) + 0x5bd1e995ULL));
  std::mt19937_64 engine(key);
  std::normal_distribution<double> noise(0.0, std::sqrt(kLabelNoiseVariance));
  return ret + noise(engine) > 0.0 ? ReturnClass::positive : ReturnClass::negative;
}

const DatedLabel* SymbolLabels::find(Date date) const {
  auto it = std::lower_bound(labels.begin(), labels.end(), date,
                             [](const DatedLabel& l, Date d) { return l.date < d; });
  if (it == labels.end() || it->date != date) return nullptr;
  return &*it;
}

LabelSeries label_returns(const ReturnSeries& returns, std::uint64_t seed) {
  LabelSeries out;
  out.reserve(returns.series.size());
  for (const auto& s : returns.series) {
    SymbolLabels l;
    l.symbol = s.symbol;
    l.labels.reserve(s.returns.size());
    for (const auto& r : s.returns) {
      l.labels.push_back({r.date, label_return(r.value, seed, s.symbol, r.date), r.value});
    }
    out.push_back(std::move(l));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Windows
// ---------------------------------------------------------------------------

void SplitConfig::validate() const {
  if (train.last < train.first) throw ParameterError("train range is empty");
  if (test.last < test.first) throw ParameterError("test range is empty");
  if (train.overlaps(test)) throw ParameterError("train and test ranges overlap");
  // Longest built-in template spans 3 days.
  if (window_length < 4) throw ParameterError("window length must be at least 4");
}

std::size_t WindowSet::degenerate_count() const {
  return static_cast<std::size_t>(
      std::count_if(windows.begin(), windows.end(), [](const auto& w) { return w.degenerate; }));
}

std::vector<double> raw_window(const SymbolSeries& series, std::size_t end_index,
                               std::size_t length) {
  if (length == 0 || end_index >= series.bars.size() || end_index + 1 < length) {
    throw ParameterError("window does not fit in series " + series.symbol);
  }
  std::vector<double> m(kPriceRows * length);
  const std::size_t first = end_index + 1 - length;
  for (std::size_t j = 0; j < length; ++j) {
    const Bar& b = series.bars[first + j];
    for (std::size_t r = 0; r < kPriceRows; ++r) {
      m[r * length + j] = b.row(static_cast<PriceRow>(r));
    }
  }
  return m;
}

WindowSplit make_windows(const PricePanel& panel, const LabelSeries& labels,
                         const SplitConfig& config) {
  config.validate();
  std::unordered_map<std::string_view, const SymbolLabels*> label_index;
  for (const auto& l : labels) label_index.emplace(l.symbol, &l);

  WindowSplit out;
  out.train.window_length = config.window_length;
  out.test.window_length = config.window_length;
  const std::size_t len = config.window_length;

  for (const auto& s : panel.series()) {
    auto found = label_index.find(s.symbol);
    if (found == label_index.end()) continue;
    const SymbolLabels& sym_labels = *found->second;
    for (std::size_t t = len; t + 1 < s.bars.size(); ++t) {
      const Date anchor = s.bars[t].date;
      const DatedLabel* label = sym_labels.find(s.bars[t + 1].date);
      if (label == nullptr) continue;
      WindowSet* target = nullptr;
      if (config.train.contains(anchor) && config.train.contains(label->date)) {
        target = &out.train;
      } else if (config.test.contains(anchor) && config.test.contains(label->date)) {
        target = &out.test;
      } else {
        continue;
      }
      LabeledWindow w;
      w.values = raw_window(s, t, len);
      w.degenerate = !standardize_in_place(w.values);
      w.label = label->label;
      w.symbol = s.symbol;
      w.anchor = anchor;
      w.next_return = label->next_return;
      target->windows.push_back(std::move(w));
    }
  }
  return out;
}

std::pair<WindowSet, WindowSet> split_tail(const WindowSet& set, double tail_fraction) {
  if (!(tail_fraction >= 0.0 && tail_fraction < 1.0)) {
    throw ParameterError("tail fraction must be in [0, 1)");
  }
  std::set<Date> dates;
  for (const auto& w : set.windows) dates.insert(w.anchor);
  std::pair<WindowSet, WindowSet> out;
  out.first.window_length = set.window_length;
  out.second.window_length = set.window_length;
  const auto head_count = static_cast<std::size_t>(
      std::floor(static_cast<double>(dates.size()) * (1.0 - tail_fraction)));
  if (head_count >= dates.size()) {
    out.first = set;
    return out;
  }
  const Date cut = *std::next(dates.begin(), static_cast<std::ptrdiff_t>(head_count));
  for (const auto& w : set.windows) {
    (w.anchor < cut ? out.first : out.second).windows.push_back(w);
  }
  return out;
}

}  // namespace candlenet
