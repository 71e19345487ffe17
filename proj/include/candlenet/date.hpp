#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace candlenet {

// Calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}
  Date(int year, unsigned month, unsigned day);

  // Strict ISO-8601 "YYYY-MM-DD"; nullopt on anything else.
  static std::optional<Date> parse(std::string_view text);

  constexpr std::int32_t days() const { return days_; }
  std::chrono::year_month_day ymd() const;
  std::string iso() const;
  bool is_weekend() const;

  constexpr auto operator<=>(const Date&) const = default;

  friend constexpr Date operator+(Date d, std::int32_t n) { return Date(d.days_ + n); }
  friend constexpr std::int32_t operator-(Date a, Date b) { return a.days_ - b.days_; }

 private:
  std::int32_t days_ = 0;
};

}  // namespace candlenet
