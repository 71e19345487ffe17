#include "candlenet/error.hpp"
#include "candlenet/hash.hpp"
#include "candlenet/market_data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <random>
#include <string>

namespace candlenet {

namespace {

// Share of the daily log-return variance that arrives as an overnight gap;
// the rest accrues between open and close.
constexpr double kGapVarianceShare = 0.2;
constexpr double kWickScale = 0.5;

int sign(double x) { return (x > 0.0) - (x < 0.0); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Date next_business_day(Date d) {
  while (d.is_weekend()) d = d + 1;
  return d;
}

std::string symbol_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "SYN%03zu", index);
  return buf;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (symbols == 0) throw ParameterError("synthetic: symbol count must be positive");
  if (length == 0) throw ParameterError("synthetic: length must be positive");
  if (!(volatility >= 0.0) || !std::isfinite(volatility)) {
    throw ParameterError("synthetic: volatility must be non-negative");
  }
  if (!(start_price > 0.0)) throw ParameterError("synthetic: start price must be positive");
  if (plant.kind == PlantKind::run) {
    if (plant.run_length < 1) throw ParameterError("synthetic: run length must be >= 1");
    if (plant.run_direction != 1 && plant.run_direction != -1) {
      throw ParameterError("synthetic: run direction must be +1 or -1");
    }
  }
  if (!std::isfinite(plant.drift)) throw ParameterError("synthetic: drift must be finite");
}

SyntheticPanel generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const double sigma = spec.volatility;
  const double gap_sd = sigma * std::sqrt(kGapVarianceShare);
  const double body_sd = sigma * std::sqrt(1.0 - kGapVarianceShare);

  std::vector<SymbolSeries> all;
  double bayes_sum = 0.0;
  std::size_t bayes_count = 0;

  for (std::size_t s = 0; s < spec.symbols; ++s) {
    std::mt19937_64 engine(mix64(spec.seed) ^ mix64(s + 1));
    std::normal_distribution<double> z(0.0, 1.0);

    SymbolSeries series;
    series.symbol = symbol_name(s);
    series.bars.reserve(spec.length);

    Date date = next_business_day(spec.start_date);
    double prev_close = spec.start_price;
    int prev_body_sign = 0;
    double prev_body = 0.0;
    int run = 0;

    for (std::size_t t = 0; t < spec.length; ++t) {
      double drift = 0.0;
      if (t > 0) {
        switch (spec.plant.kind) {
          case PlantKind::none: break;
          case PlantKind::run:
            if (run >= spec.plant.run_length) drift = spec.plant.drift;
            break;
          case PlantKind::body_reversal:
            drift = -spec.plant.drift * prev_body_sign;
            break;
          case PlantKind::scaled_reversal:
            drift = -spec.plant.drift * prev_body;
            break;
        }
        if (sigma > 0.0) {
          bayes_sum += normal_cdf(std::abs(drift) / sigma);
        } else {
          bayes_sum += drift != 0.0 ? 1.0 : 0.5;
        }
        ++bayes_count;
      }

      const double z_gap = z(engine);
      const double z_body = z(engine);
      const double z_up = z(engine);
      const double z_down = z(engine);

      Bar bar;
      bar.date = date;
      bar.open = t == 0 ? spec.start_price : prev_close * std::exp(gap_sd * z_gap);
      bar.close = bar.open * std::exp(drift + body_sd * z_body);
      bar.high = std::max(bar.open, bar.close) * std::exp(kWickScale * sigma * std::abs(z_up));
      bar.low = std::min(bar.open, bar.close) * std::exp(-kWickScale * sigma * std::abs(z_down));

      if (t > 0) {
        run = sign(bar.close - prev_close) == spec.plant.run_direction ? run + 1 : 0;
      }
      prev_body_sign = sign(bar.close - bar.open);
      prev_body = std::log(bar.close / bar.open);
      prev_close = bar.close;
      series.bars.push_back(bar);
      date = next_business_day(date + 1);
    }
    all.push_back(std::move(series));
  }

  SyntheticPanel out;
  out.panel = PricePanel(std::move(all));
  out.bayes_accuracy = bayes_count > 0 ? bayes_sum / static_cast<double>(bayes_count) : 0.5;
  return out;
}

namespace {

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParameterError("synthetic: bad value for " + std::string(key) + ": '" +
                         std::string(value) + "'");
  }
  return out;
}

}  // namespace

void apply_synthetic_setting(SyntheticSpec& spec, std::string_view key, std::string_view value) {
  if (key == "symbols") {
    spec.symbols = parse_number<std::size_t>(key, value);
  } else if (key == "length") {
    spec.length = parse_number<std::size_t>(key, value);
  } else if (key == "volatility") {
    spec.volatility = parse_number<double>(key, value);
  } else if (key == "seed") {
    spec.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "start_price") {
    spec.start_price = parse_number<double>(key, value);
  } else if (key == "start_date") {
    auto d = Date::parse(value);
    if (!d) throw ParameterError("synthetic: bad start_date '" + std::string(value) + "'");
    spec.start_date = *d;
  } else if (key == "plant") {
    if (value == "none") {
      spec.plant.kind = PlantKind::none;
    } else if (value == "run") {
      spec.plant.kind = PlantKind::run;
    } else if (value == "body_reversal" || value == "body-reversal") {
      spec.plant.kind = PlantKind::body_reversal;
    } else if (value == "scaled_reversal" || value == "scaled-reversal") {
      spec.plant.kind = PlantKind::scaled_reversal;
    } else {
      throw ParameterError("synthetic: unknown plant '" + std::string(value) + "'");
    }
  } else if (key == "run_length") {
    spec.plant.run_length = parse_number<int>(key, value);
  } else if (key == "run_direction") {
    if (value == "up" || value == "1" || value == "+1") {
      spec.plant.run_direction = 1;
    } else if (value == "down" || value == "-1") {
      spec.plant.run_direction = -1;
    } else {
      throw ParameterError("synthetic: run_direction must be up or down");
    }
  } else if (key == "drift") {
    spec.plant.drift = parse_number<double>(key, value);
  } else {
    throw ParameterError("synthetic: unknown key '" + std::string(key) + "'");
  }
}

SyntheticSpec parse_synthetic_spec(std::istream& in) {
  SyntheticSpec spec;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view v = line;
    if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim_view(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw ParameterError("synthetic: expected key = value, got '" + std::string(v) + "'");
    }
    apply_synthetic_setting(spec, trim_view(v.substr(0, eq)), trim_view(v.substr(eq + 1)));
  }
  spec.validate();
  return spec;
}

}  // namespace candlenet
