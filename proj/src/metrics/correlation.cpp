#include "pvae/metrics/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "pvae/errors.hpp"

namespace pvae::metrics {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson: series lengths differ");
  if (x.size() < 2) throw ContractError("pearson: need at least two samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationSummary cross_correlation(std::span<const double> a, std::size_t da, std::span<const double> b,
                                     std::size_t db) {
  if (da == 0 || db == 0) throw ContractError("cross_correlation: empty subspace");
  if (a.size() % da != 0 || b.size() % db != 0 || a.size() / da != b.size() / db) {
    throw DimensionError("cross_correlation: sample counts differ between subspaces");
  }
  const std::size_t n = a.size() / da;
  if (n < 2) throw ContractError("cross_correlation: need at least two samples");

  auto column = [n](std::span<const double> m, std::size_t width, std::size_t c) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = m[i * width + c];
    return col;
  };
  std::vector<std::vector<double>> ca(da), cb(db);
  for (std::size_t i = 0; i < da; ++i) ca[i] = column(a, da, i);
  for (std::size_t j = 0; j < db; ++j) cb[j] = column(b, db, j);

  CorrelationSummary s;
  double total = 0.0;
  for (std::size_t i = 0; i < da; ++i) {
    for (std::size_t j = 0; j < db; ++j) {
      const auto r = pearson(ca[i], cb[j]);
      ++s.pairs;
      if (!r) {
        ++s.zero_variance_pairs;
        continue;
      }
      const double v = std::abs(*r);
      s.max_abs = std::max(s.max_abs, v);
      total += v;
    }
  }
  s.mean_abs = total / static_cast<double>(s.pairs);
  return s;
}

}  // namespace pvae::metrics
