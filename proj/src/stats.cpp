#include "candlenet/stats.hpp"

#include "candlenet/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace candlenet {

KsResult ks_two_sample(std::span<const double> s1, std::span<const double> s2) {
  if (s1.empty() || s2.empty()) throw ParameterError("K-S test needs two non-empty samples");
  std::vector<double> a(s1.begin(), s1.end());
  std::vector<double> b(s2.begin(), s2.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());

  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < a.size() && j < b.size()) {
    const double z = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == z) ++i;
    while (j < b.size() && b[j] == z) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }

  KsResult out;
  out.n1 = a.size();
  out.n2 = b.size();
  out.sup_distance = sup;
  out.statistic = std::sqrt(n1 * n2 / (n1 + n2)) * sup;
  out.p_value = kolmogorov_survival(out.statistic);
  return out;
}

double kolmogorov_survival(double gamma) {
  constexpr double kTol = 1e-12;
  if (gamma <= 0.0) return 1.0;
  if (gamma < 1.18) {
    // P(K <= g) = sqrt(2 pi) / g * sum exp(-(2k-1)^2 pi^2 / (8 g^2))
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * gamma * gamma);
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * c);
      sum += term;
      if (term < kTol) break;
    }
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / gamma * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * gamma * gamma);
    sum += (k % 2 == 1) ? term : -term;
    if (term < kTol) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ParameterError("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DistributionSummary summarize(std::span<const double> sample) {
  if (sample.empty()) throw ParameterError("cannot summarize an empty sample");
  constexpr double kBp = 1e4;
  DistributionSummary out;
  out.n = sample.size();
  const double n = static_cast<double>(sample.size());
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  out.mean_bp = mean * kBp;

  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  out.median_bp = sorted_quantile(sorted, 0.5) * kBp;
  out.q1_bp = sorted_quantile(sorted, 0.25) * kBp;
  out.q3_bp = sorted_quantile(sorted, 0.75) * kBp;

  if (sample.size() >= 2) {
    double ss = 0.0;
    for (double x : sample) ss += (x - mean) * (x - mean);
    out.std_bp = std::sqrt(ss / (n - 1.0)) * kBp;
    out.notch_bp = kNotchFactor * (out.q3_bp - out.q1_bp) / std::sqrt(n);
  }
  return out;
}

AucResult mww_auc(std::span<const double> scores, std::span<const ReturnClass> labels) {
  if (scores.size() != labels.size()) throw ParameterError("scores and labels differ in length");
  AucResult out;
  for (auto l : labels) (l == ReturnClass::positive ? out.n_pos : out.n_neg)++;
  if (out.n_pos == 0 || out.n_neg == 0) throw ParameterError("AUC needs both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their mean.
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == ReturnClass::positive) rank_sum += midrank;
    }
    i = j;
  }

  const double np = static_cast<double>(out.n_pos);
  const double nn = static_cast<double>(out.n_neg);
  out.u = rank_sum - np * (np + 1.0) / 2.0;
  out.auc = out.u / (np * nn);
  out.mu_u = np * nn / 2.0;
  out.sigma_u = std::sqrt(np * nn * (np + nn + 1.0) / 12.0);
  out.z = (out.u - out.mu_u) / out.sigma_u;
  if (out.z >= 0.0) out.significance = normal_cdf(out.z);
  return out;
}

double accuracy(std::span<const ReturnClass> labels, std::span<const ReturnClass> predictions) {
  if (labels.size() != predictions.size()) throw ParameterError("label and prediction counts differ");
  if (labels.empty()) throw ParameterError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += labels[i] == predictions[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace candlenet
