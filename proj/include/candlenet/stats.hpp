#pragma once

#include "candlenet/market_data.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace candlenet {

struct KsResult {
  double statistic = 0.0;     // gamma = sqrt(n1 n2 / (n1 + n2)) * sup |F1 - F2|
  double sup_distance = 0.0;  // sup |F1 - F2|
  double p_value = 1.0;       // asymptotic Kolmogorov tail Q(gamma)
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

KsResult ks_two_sample(std::span<const double> s1, std::span<const double> s2);

// Q(g) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 g^2). Small g switches to the
// theta-function form of the same distribution, which converges there.
double kolmogorov_survival(double gamma);

double normal_cdf(double z);

// Moments in basis points (1 bp = 1e-4). Quartiles use linear interpolation
// between order statistics; std uses the n-1 (sample) convention; the notch
// half-width is 1.57 IQR / sqrt(n).
struct DistributionSummary {
  std::size_t n = 0;
  double mean_bp = 0.0;
  std::optional<double> std_bp;
  double median_bp = 0.0;
  double q1_bp = 0.0;
  double q3_bp = 0.0;
  std::optional<double> notch_bp;
};

inline constexpr double kNotchFactor = 1.57;
inline constexpr const char* kStdConvention = "sample (n-1)";

DistributionSummary summarize(std::span<const double> sample);

// Linear-interpolation quantile of an ascending-sorted sample.
double sorted_quantile(std::span<const double> sorted, double p);

struct AucResult {
  double auc = 0.5;
  double u = 0.0;
  double mu_u = 0.0;
  double sigma_u = 0.0;
  double z = 0.0;
  std::optional<double> significance;  // Phi(z), reported for z >= 0 only
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// Mann-Whitney U of the positive class scores, midranks for ties.
AucResult mww_auc(std::span<const double> scores, std::span<const ReturnClass> labels);

double accuracy(std::span<const ReturnClass> labels, std::span<const ReturnClass> predictions);

}  // namespace candlenet
