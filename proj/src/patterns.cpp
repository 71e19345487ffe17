#include "candlenet/patterns.hpp"

#include "candlenet/error.hpp"
#include "candlenet/standardize.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <sstream>

namespace candlenet {

std::string_view to_string(PatternDirection d) {
  switch (d) {
    case PatternDirection::bullish: return "bullish";
    case PatternDirection::bearish: return "bearish";
    case PatternDirection::none: return "none";
  }
  return "none";
}

PatternDirection parse_direction(std::string_view text) {
  if (text == "bullish") return PatternDirection::bullish;
  if (text == "bearish") return PatternDirection::bearish;
  if (text == "none") return PatternDirection::none;
  throw ParameterError("unknown pattern direction '" + std::string(text) + "'");
}

Template::Template(std::string name, std::size_t length, std::vector<double> values,
                   PatternDirection direction)
    : name_(std::move(name)), length_(length), values_(std::move(values)), direction_(direction) {
  if (length_ == 0 || values_.size() != kPriceRows * length_) {
    throw ParameterError("template " + name_ + ": expected 4×m values");
  }
}

Template standardize_template(std::string name, std::span<const double> raw, std::size_t length,
                              PatternDirection direction) {
  if (length == 0 || raw.size() != kPriceRows * length) {
    throw ParameterError("template " + name + ": expected 4×m values");
  }
  for (std::size_t j = 0; j < length; ++j) {
    const double open = raw[static_cast<std::size_t>(PriceRow::open) * length + j];
    const double close = raw[static_cast<std::size_t>(PriceRow::close) * length + j];
    const double low = raw[static_cast<std::size_t>(PriceRow::low) * length + j];
    const double high = raw[static_cast<std::size_t>(PriceRow::high) * length + j];
    if (low > std::min(open, close) || high < std::max(open, close)) {
      throw ParameterError("template " + name + ": column " + std::to_string(j) +
                           " breaks low <= open,close <= high");
    }
  }
  std::vector<double> values(raw.begin(), raw.end());
  if (!standardize_in_place(values)) {
    throw ParameterError("template " + name + ": degenerate (constant) matrix");
  }
  return Template(std::move(name), length, std::move(values), direction);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

}  // namespace

std::vector<TemplateRecord> parse_template_records(std::istream& in) {
  std::vector<TemplateRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool saw_version = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    const auto where = " (templates line " + std::to_string(line_no) + ")";
    if (!saw_version) {
      if (v.substr(0, 8) != "version ") throw FormatError("template file lacks a version line" + where);
      int version = 0;
      const auto num = trim(v.substr(8));
      std::from_chars(num.data(), num.data() + num.size(), version);
      if (version != kTemplateFormatVersion) {
        throw FormatError("unsupported template file version " + std::string(num) + where);
      }
      saw_version = true;
      continue;
    }
    const auto fields = split(v, '|');
    if (fields.size() != 5) throw FormatError("expected 5 '|' fields" + where);
    TemplateRecord rec;
    rec.name = std::string(fields[0]);
    std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), rec.length);
    rec.direction = parse_direction(fields[2]);
    rec.mirror_of = std::string(fields[3]);
    const auto days = split(fields[4], ';');
    if (rec.length == 0 || days.size() != rec.length) {
      throw FormatError("day group count does not match length" + where);
    }
    rec.raw.assign(kPriceRows * rec.length, 0.0);
    for (std::size_t j = 0; j < days.size(); ++j) {
      std::istringstream ds{std::string(days[j])};
      for (std::size_t r = 0; r < kPriceRows; ++r) {
        double x = 0.0;
        if (!(ds >> x)) throw FormatError("expected open close low high" + where);
        rec.raw[r * rec.length + j] = x;
      }
    }
    out.push_back(std::move(rec));
  }
  if (!saw_version) throw FormatError("template file is empty");
  return out;
}

const std::vector<TemplateRecord>& builtin_template_records() {
  static const std::vector<TemplateRecord> records = [] {
    std::istringstream in{std::string(builtin_template_data())};
    return parse_template_records(in);
  }();
  return records;
}

std::vector<Template> builtin_templates(std::size_t m) {
  if (m < 1 || m > 3) throw ParameterError("built-in templates exist for lengths 1, 2 and 3 only");
  std::vector<Template> out;
  for (const auto& rec : builtin_template_records()) {
    if (rec.length == m) out.push_back(standardize_template(rec.name, rec.raw, rec.length, rec.direction));
  }
  if (out.size() != kTemplatesPerLength) {
    throw FormatError("built-in template data holds " + std::to_string(out.size()) +
                      " templates of length " + std::to_string(m));
  }
  return out;
}

std::vector<Template> all_builtin_templates() {
  std::vector<Template> out;
  for (std::size_t m = 1; m <= 3; ++m) {
    auto part = builtin_templates(m);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

}  // namespace candlenet
