#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pvae::metrics {

/// Pearson correlation; nullopt when either series has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationSummary {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  std::size_t pairs = 0;
  /// Pairs with a zero-variance dimension; their correlation counts as 0.
  std::size_t zero_variance_pairs = 0;
};

/// Absolute Pearson correlation between every (a-dim, b-dim) pair, where a and
/// b hold one row per sample (n x da and n x db, row-major).
CorrelationSummary cross_correlation(std::span<const double> a, std::size_t da, std::span<const double> b,
                                     std::size_t db);

}  // namespace pvae::metrics
