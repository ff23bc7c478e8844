#pragma once

namespace pvae::proximity::detail {

/// Median pairwise squared distance over the 2n points of {a, b} (points
/// 0..n-1 are a's rows, n..2n-1 are b's). `first`/`second` name the pair
/// that attains it; both are -1 when the sample is degenerate and the
/// bandwidth falls back to the constant 1.
struct Bandwidth {
  double value = 1.0;
  int first = -1;
  int second = -1;
  /// Distance from the median to the nearest other pairwise value; the
  /// bandwidth is smooth only while perturbations stay below this.
  double gap = 0.0;
};

Bandwidth median_bandwidth(const double* a, const double* b, int n, int d);

/// Unbiased U-statistic MMD^2 between sample blocks a and b (n x d each) under
/// k(x, y) = exp(-|x - y|^2 / bandwidth). Non-null grad_a/grad_b receive the
/// derivative w.r.t. each sample coordinate at fixed bandwidth; a non-null
/// grad_bandwidth receives dU/d(bandwidth).
double mmd_u_statistic(const double* a, const double* b, int n, int d, double bandwidth, double* grad_a,
                       double* grad_b, double* grad_bandwidth = nullptr);

}  // namespace pvae::proximity::detail
