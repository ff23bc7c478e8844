#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "pvae/autodiff/ops.hpp"
#include "pvae/proximity/proximity.hpp"

namespace pvae::proximity {

/// A batch of diagonal posteriors on the tape: both [N x d].
struct PosteriorRows {
  ad::Var mean;
  ad::Var log_std;
};

// Row-wise differentiable counterparts of the closed forms in proximity.hpp.
// Every function maps N row pairs to an [N x 1] column.

ad::Var cosine_distance(ad::Var a, ad::Var b);
ad::Var gaussian_kl(const PosteriorRows& p, const PosteriorRows& q);
ad::Var hellinger(const PosteriorRows& p, const PosteriorRows& q);
ad::Var generalized_js(const PosteriorRows& p, const PosteriorRows& q);

/// Standard-normal noise for the MMD estimator: two blocks per row pair, each
/// laid out as rows x samples x dim.
struct MmdNoise {
  std::size_t rows = 0;
  int samples = 0;
  std::size_t dim = 0;
  std::vector<double> block_a;
  std::vector<double> block_b;

  static MmdNoise draw(std::size_t rows, int samples, std::size_t dim, std::mt19937_64& rng);
};

/// Row-wise MMD estimate with the noise held fixed. The median bandwidth is
/// differentiated through the pair that attains it.
ad::Var mmd(const PosteriorRows& p, const PosteriorRows& q, const MmdNoise& noise);

/// Smallest median-bandwidth gap over all rows and both noise assignments of
/// mmd(p, q, noise). Gradient checks use it to stay clear of median switches.
double mmd_bandwidth_gap(const PosteriorRows& p, const PosteriorRows& q, const MmdNoise& noise);

/// Dispatch on kind; `noise` is only read for Mmd.
ad::Var distance(ProximityKind kind, const PosteriorRows& p, const PosteriorRows& q, const MmdNoise* noise);

/// relu(margin + d_pos - row_mean(d_negs)); d_pos is [N x 1], d_negs [N x m].
ad::Var margin_loss(ad::Var d_pos, ad::Var d_negs, double margin);

}  // namespace pvae::proximity
