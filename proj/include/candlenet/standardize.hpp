#pragma once

#include <span>

namespace candlenet {

// Rescales `values` in place to zero mean and unit population variance.
// Returns false, and zeroes the values, when they are (numerically) constant;
// such windows carry no shape information and are treated as neutral.
bool standardize_in_place(std::span<double> values);

// Frobenius norm of a flattened matrix.
double frobenius_norm(std::span<const double> values);

}  // namespace candlenet
