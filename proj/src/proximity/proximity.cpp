#include "pvae/proximity/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pvae/errors.hpp"
#include "pvae/proximity/mmd_kernel.hpp"

namespace pvae {

void GaussianPosterior::validate() const {
  if (mean.size() != stddev.size()) {
    throw ContractError("posterior mean has " + std::to_string(mean.size()) + " dims, stddev " +
                        std::to_string(stddev.size()));
  }
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (!std::isfinite(mean[i]) || !std::isfinite(stddev[i]) || !(stddev[i] > 0.0)) {
      throw ContractError("invalid posterior at dim " + std::to_string(i));
    }
  }
}

}  // namespace pvae

namespace pvae::proximity {
namespace {

void require_same_dim(const GaussianPosterior& p, const GaussianPosterior& q) {
  if (p.dim() != q.dim()) {
    throw DimensionError("posterior dims differ: " + std::to_string(p.dim()) + " vs " + std::to_string(q.dim()));
  }
}

double sq_dist(const double* x, const double* y, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    const double t = x[k] - y[k];
    s += t * t;
  }
  return s;
}

std::vector<double> reparameterize_block(const GaussianPosterior& p, std::span<const double> noise, int n) {
  const int d = static_cast<int>(p.dim());
  std::vector<double> out(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) out[i * d + k] = p.mean[k] + p.stddev[k] * noise[i * d + k];
  return out;
}

}  // namespace

ProximityKind parse_proximity_kind(const std::string& name) {
  if (name == "cosine") return ProximityKind::Cosine;
  if (name == "hellinger") return ProximityKind::Hellinger;
  if (name == "kl") return ProximityKind::Kl;
  if (name == "js" || name == "generalized_js") return ProximityKind::GeneralizedJs;
  if (name == "mmd") return ProximityKind::Mmd;
  throw ConfigError("unknown proximity kind '" + name + "' (expected cosine|hellinger|kl|js|mmd)");
}

std::string to_string(ProximityKind kind) {
  switch (kind) {
    case ProximityKind::Cosine: return "cosine";
    case ProximityKind::Hellinger: return "hellinger";
    case ProximityKind::Kl: return "kl";
    case ProximityKind::GeneralizedJs: return "js";
    case ProximityKind::Mmd: return "mmd";
  }
  return "?";
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine_distance: dims " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double cos = ab / ((std::sqrt(aa) + kCosineNormEpsilon) * (std::sqrt(bb) + kCosineNormEpsilon));
  return std::clamp(0.5 * (1.0 - cos), 0.0, 1.0);
}

double gaussian_kl(const GaussianPosterior& p, const GaussianPosterior& q) {
  require_same_dim(p, q);
  double kl = 0.0;
  for (std::size_t d = 0; d < p.dim(); ++d) {
    const double sp = p.stddev[d], sq = q.stddev[d], dm = p.mean[d] - q.mean[d];
    kl += std::log(sq / sp) + (sp * sp + dm * dm) / (2.0 * sq * sq) - 0.5;
  }
  return std::max(kl, 0.0);
}

double kl_to_standard_normal(const GaussianPosterior& q) {
  double kl = 0.0;
  for (std::size_t d = 0; d < q.dim(); ++d) {
    const double m = q.mean[d], s2 = q.stddev[d] * q.stddev[d];
    kl += 0.5 * (m * m + s2 - 1.0 - std::log(s2));
  }
  return std::max(kl, 0.0);
}

double hellinger(const GaussianPosterior& p, const GaussianPosterior& q) {
  require_same_dim(p, q);
  double log_bc = 0.0;
  for (std::size_t d = 0; d < p.dim(); ++d) {
    const double sp = p.stddev[d], sq = q.stddev[d], dm = p.mean[d] - q.mean[d];
    const double s = sp * sp + sq * sq;
    log_bc += 0.5 * std::log(2.0 * sp * sq / s) - dm * dm / (4.0 * s);
  }
  return std::sqrt(std::clamp(1.0 - std::exp(log_bc), 0.0, 1.0));
}

GaussianPosterior geometric_midpoint(const GaussianPosterior& p, const GaussianPosterior& q) {
  require_same_dim(p, q);
  GaussianPosterior g;
  g.mean.resize(p.dim());
  g.stddev.resize(p.dim());
  for (std::size_t d = 0; d < p.dim(); ++d) {
    const double lp = 1.0 / (p.stddev[d] * p.stddev[d]);
    const double lq = 1.0 / (q.stddev[d] * q.stddev[d]);
    const double lg = 0.5 * (lp + lq);
    g.mean[d] = 0.5 * (lp * p.mean[d] + lq * q.mean[d]) / lg;
    g.stddev[d] = 1.0 / std::sqrt(lg);
  }
  return g;
}

double generalized_js(const GaussianPosterior& p, const GaussianPosterior& q) {
  const GaussianPosterior g = geometric_midpoint(p, q);
  return 0.5 * gaussian_kl(p, g) + 0.5 * gaussian_kl(q, g);
}

double mmd_with_noise(const GaussianPosterior& p, const GaussianPosterior& q, std::span<const double> noise_a,
                      std::span<const double> noise_b, int n) {
  require_same_dim(p, q);
  if (n < 2) throw ContractError("mmd: need at least 2 samples, got " + std::to_string(n));
  const int d = static_cast<int>(p.dim());
  const std::size_t need = static_cast<std::size_t>(n) * d;
  if (noise_a.size() != need || noise_b.size() != need) throw DimensionError("mmd: noise block size mismatch");
  const auto pa = reparameterize_block(p, noise_a, n);
  const auto qb = reparameterize_block(q, noise_b, n);
  const auto pb = reparameterize_block(p, noise_b, n);
  const auto qa = reparameterize_block(q, noise_a, n);
  const double h1 = detail::median_bandwidth(pa.data(), qb.data(), n, d).value;
  const double h2 = detail::median_bandwidth(pb.data(), qa.data(), n, d).value;
  const double u1 = detail::mmd_u_statistic(pa.data(), qb.data(), n, d, h1, nullptr, nullptr);
  const double u2 = detail::mmd_u_statistic(pb.data(), qa.data(), n, d, h2, nullptr, nullptr);
  return 0.5 * (u1 + u2);
}

double mmd(const GaussianPosterior& p, const GaussianPosterior& q, int n, std::mt19937_64& rng) {
  require_same_dim(p, q);
  if (n < 2) throw ContractError("mmd: need at least 2 samples, got " + std::to_string(n));
  std::normal_distribution<double> normal;
  const std::size_t count = static_cast<std::size_t>(n) * p.dim();
  std::vector<double> ea(count), eb(count);
  for (double& v : ea) v = normal(rng);
  for (double& v : eb) v = normal(rng);
  return mmd_with_noise(p, q, ea, eb, n);
}

double margin_loss(double d_pos, std::span<const double> d_negs, double margin) {
  if (d_negs.empty()) throw ContractError("margin_loss: at least one negative distance is required");
  double s = 0.0;
  for (double v : d_negs) s += v;
  return std::max(0.0, margin + d_pos - s / static_cast<double>(d_negs.size()));
}

double total_loss(double rec, double kl, double kl_weight, std::span<const double> criterion_losses,
                  std::span<const double> criterion_weights) {
  if (criterion_losses.size() != criterion_weights.size()) {
    throw DimensionError("total_loss: " + std::to_string(criterion_losses.size()) + " losses, " +
                         std::to_string(criterion_weights.size()) + " weights");
  }
  if (kl_weight < 0.0) throw ContractError("total_loss: negative KL weight");
  double total = rec + kl_weight * kl;
  for (std::size_t c = 0; c < criterion_losses.size(); ++c) {
    if (criterion_weights[c] < 0.0) throw ContractError("total_loss: negative criterion weight");
    total += criterion_weights[c] * criterion_losses[c];
  }
  return total;
}

namespace detail {

Bandwidth median_bandwidth(const double* a, const double* b, int n, int d) {
  auto point = [&](int i) { return i < n ? a + i * d : b + (i - n) * d; };
  struct PairDist {
    double dist;
    int i, j;
  };
  std::vector<PairDist> dist;
  dist.reserve(static_cast<std::size_t>(n) * (2 * n - 1));
  for (int i = 0; i < 2 * n; ++i)
    for (int j = i + 1; j < 2 * n; ++j) dist.push_back({sq_dist(point(i), point(j), d), i, j});
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end(), [](const PairDist& x, const PairDist& y) { return x.dist < y.dist; });
  if (!(mid->dist > 0.0) || !std::isfinite(mid->dist)) return {};
  double gap = std::numeric_limits<double>::infinity();
  for (auto it = dist.begin(); it != dist.end(); ++it) {
    if (it != mid) gap = std::min(gap, std::abs(it->dist - mid->dist));
  }
  return {mid->dist, mid->i, mid->j, gap};
}

double mmd_u_statistic(const double* a, const double* b, int n, int d, double bandwidth, double* grad_a,
                       double* grad_b, double* grad_bandwidth) {
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  std::vector<double> kaa(nn), kbb(nn), kab(nn);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      kab[i * n + j] = std::exp(-sq_dist(a + i * d, b + j * d, d) / bandwidth);
      if (j > i) {
        kaa[i * n + j] = kaa[j * n + i] = std::exp(-sq_dist(a + i * d, a + j * d, d) / bandwidth);
        kbb[i * n + j] = kbb[j * n + i] = std::exp(-sq_dist(b + i * d, b + j * d, d) / bandwidth);
      }
    }
  }
  const double norm = 1.0 / (static_cast<double>(n) * (n - 1));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      total += (kaa[i * n + j] + kbb[i * n + j]) - (kab[i * n + j] + kab[j * n + i]);
    }
  }
  if (grad_bandwidth) {
    // d exp(-D / h) / dh = exp(-D / h) D / h^2
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        s += kaa[i * n + j] * sq_dist(a + i * d, a + j * d, d) + kbb[i * n + j] * sq_dist(b + i * d, b + j * d, d) -
             kab[i * n + j] * sq_dist(a + i * d, b + j * d, d) - kab[j * n + i] * sq_dist(a + j * d, b + i * d, d);
      }
    }
    *grad_bandwidth += s * norm / (bandwidth * bandwidth);
  }
  if (grad_a || grad_b) {
    // d k(x, y) / dx = -2 k (x - y) / h. Over ordered pairs i != j, each self
    // kernel appears twice and each cross kernel k(a_i, b_j) twice as well.
    const double c = -2.0 / bandwidth * norm;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        for (int k = 0; k < d; ++k) {
          const double daa = a[i * d + k] - a[j * d + k];
          const double dbb = b[i * d + k] - b[j * d + k];
          const double dab = a[i * d + k] - b[j * d + k];
          if (grad_a) {
            grad_a[i * d + k] += 2.0 * c * kaa[i * n + j] * daa;
            grad_a[i * d + k] -= 2.0 * c * kab[i * n + j] * dab;
          }
          if (grad_b) {
            grad_b[i * d + k] += 2.0 * c * kbb[i * n + j] * dbb;
            grad_b[j * d + k] += 2.0 * c * kab[i * n + j] * dab;
          }
        }
      }
    }
  }
  return total * norm;
}

}  // namespace detail
}  // namespace pvae::proximity
