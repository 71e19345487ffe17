#include "candlenet/hash.hpp"
#include "candlenet/standardize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

namespace candlenet {

void Fnv1a::update(std::span<const double> values) {
  for (double v : values) update_u64(std::bit_cast<std::uint64_t>(v));
}

void Fnv1a::update_u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    state_ ^= (v >> (8 * i)) & 0xffU;
    state_ *= 0x100000001b3ULL;
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

bool standardize_in_place(std::span<double> values) {
  if (values.empty()) return false;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  const double sd = std::sqrt(var);
  // Relative cutoff: a spread below ~1e-12 of the price level is rounding noise.
  if (*lo == *hi || sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
    std::fill(values.begin(), values.end(), 0.0);
    return false;
  }
  for (double& v : values) v = (v - mean) / sd;
  return true;
}

double frobenius_norm(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

}  // namespace candlenet
