#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "pvae/gaussian.hpp"

namespace pvae::proximity {

/// Cosine consumes posterior means; the others consume full posteriors.
enum class ProximityKind { Cosine, Hellinger, Kl, GeneralizedJs, Mmd };

/// Accepts "cosine", "hellinger", "kl", "js" (or "generalized_js"), "mmd".
ProximityKind parse_proximity_kind(const std::string& name);
std::string to_string(ProximityKind kind);

struct MarginConfig {
  double margin = 1.0;
  ProximityKind kind = ProximityKind::Cosine;
  /// Reparameterized samples per distribution when kind == Mmd.
  int mmd_samples = 32;
};

/// Added to each norm so zero vectors are legal (they sit at distance 0.5).
inline constexpr double kCosineNormEpsilon = 1e-12;

/// 1/2 (1 - <a,b> / (|a| |b|)), in [0, 1].
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// KL(P || Q) for diagonal Gaussians.
double gaussian_kl(const GaussianPosterior& p, const GaussianPosterior& q);

/// KL(q || N(0, I)).
double kl_to_standard_normal(const GaussianPosterior& q);

/// Hellinger distance, in [0, 1].
double hellinger(const GaussianPosterior& p, const GaussianPosterior& q);

/// Normalized geometric mean of two diagonal Gaussians: precision is the
/// average precision, natural mean the average natural mean.
GaussianPosterior geometric_midpoint(const GaussianPosterior& p, const GaussianPosterior& q);

/// 1/2 KL(P || G) + 1/2 KL(Q || G) with G = geometric_midpoint(P, Q).
double generalized_js(const GaussianPosterior& p, const GaussianPosterior& q);

/// Unbiased squared MMD with an RBF kernel over `n` reparameterized draws from
/// each distribution. Bandwidth is the median pairwise squared distance of the
/// joint sample. Both assignments of the two noise blocks are averaged, which
/// makes the estimate exactly symmetric in (P, Q) for a given rng state.
double mmd(const GaussianPosterior& p, const GaussianPosterior& q, int n, std::mt19937_64& rng);

/// Same estimator on explicit standard-normal noise blocks, each n x d row-major.
double mmd_with_noise(const GaussianPosterior& p, const GaussianPosterior& q, std::span<const double> noise_a,
                      std::span<const double> noise_b, int n);

/// max(0, margin + d_pos - mean(d_negs)). Throws ContractError on empty negatives.
double margin_loss(double d_pos, std::span<const double> d_negs, double margin = 1.0);

/// L_rec + kl_weight * L_kl + sum_c lambda_c * L_c.
double total_loss(double rec, double kl, double kl_weight, std::span<const double> criterion_losses,
                  std::span<const double> criterion_weights);

}  // namespace pvae::proximity
