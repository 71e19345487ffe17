#pragma once

#include "candlenet/market_data.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace candlenet {

enum class PatternDirection { bullish, bearish, none };

std::string_view to_string(PatternDirection d);
PatternDirection parse_direction(std::string_view text);

// Standardized 4×m pattern matrix, row-major in PriceRow order. Chartist
// templates and learned convolution filters share this shape.
class Template {
 public:
  Template() = default;
  Template(std::string name, std::size_t length, std::vector<double> values,
           PatternDirection direction);

  const std::string& name() const { return name_; }
  std::size_t length() const { return length_; }
  PatternDirection direction() const { return direction_; }
  std::span<const double> values() const { return values_; }
  double value(PriceRow row, std::size_t col) const {
    return values_[static_cast<std::size_t>(row) * length_ + col];
  }

 private:
  std::string name_;
  std::size_t length_ = 0;
  std::vector<double> values_;
  PatternDirection direction_ = PatternDirection::none;
};

// (raw - mean) / std over all 4m entries. Throws ParameterError when the
// matrix is constant or a column breaks low <= open,close <= high.
Template standardize_template(std::string name, std::span<const double> raw, std::size_t length,
                              PatternDirection direction);

inline constexpr int kTemplateFormatVersion = 1;
inline constexpr std::size_t kTemplatesPerLength = 8;

struct TemplateRecord {
  std::string name;
  std::size_t length = 0;
  PatternDirection direction = PatternDirection::none;
  std::string mirror_of;
  std::vector<double> raw;  // 4×length, row-major
};

// Parses the template data file format (see data/templates.txt). Rejects
// files whose version line differs from kTemplateFormatVersion.
std::vector<TemplateRecord> parse_template_records(std::istream& in);

// Text of data/templates.txt, embedded at build time.
std::string_view builtin_template_data();

const std::vector<TemplateRecord>& builtin_template_records();

// The eight chartist templates of length m in {1, 2, 3}, in file order.
std::vector<Template> builtin_templates(std::size_t m);

// All 24 built-ins, ordered by length then file order.
std::vector<Template> all_builtin_templates();

}  // namespace candlenet
