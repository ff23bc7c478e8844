#include "pvae/proximity/tape_proximity.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pvae/errors.hpp"
#include "pvae/proximity/mmd_kernel.hpp"

namespace pvae::proximity {

using namespace pvae::ad;

Var cosine_distance(Var a, Var b) {
  Var na = add_scalar(l2norm(a), kCosineNormEpsilon);
  Var nb = add_scalar(l2norm(b), kCosineNormEpsilon);
  Var cos = div(dot(a, b), mul(na, nb));
  return scale(add_scalar(scale(cos, -1.0), 1.0), 0.5);
}

Var gaussian_kl(const PosteriorRows& p, const PosteriorRows& q) {
  // log(sq/sp) + (sp^2 + dm^2) / (2 sq^2) - 1/2, summed over dims.
  Var log_ratio = sub(q.log_std, p.log_std);
  Var var_ratio = exp(scale(log_ratio, -2.0));
  Var inv_q_var = exp(scale(q.log_std, -2.0));
  Var dm2 = square(sub(p.mean, q.mean));
  Var quad = scale(add(var_ratio, mul(dm2, inv_q_var)), 0.5);
  return row_sum(add_scalar(add(log_ratio, quad), -0.5));
}

Var hellinger(const PosteriorRows& p, const PosteriorRows& q) {
  Var var_sum = add(exp(scale(p.log_std, 2.0)), exp(scale(q.log_std, 2.0)));
  Var log_coef = scale(sub(add_scalar(add(p.log_std, q.log_std), std::numbers::ln2), log(var_sum)), 0.5);
  Var dm2 = square(sub(p.mean, q.mean));
  Var log_bc = sub(log_coef, scale(div(dm2, var_sum), 0.25));
  Var bc = exp(row_sum(log_bc));
  return sqrt(relu(add_scalar(scale(bc, -1.0), 1.0)));
}

Var generalized_js(const PosteriorRows& p, const PosteriorRows& q) {
  Var prec_p = exp(scale(p.log_std, -2.0));
  Var prec_q = exp(scale(q.log_std, -2.0));
  Var prec_g = scale(add(prec_p, prec_q), 0.5);
  Var mean_g = div(scale(add(mul(prec_p, p.mean), mul(prec_q, q.mean)), 0.5), prec_g);
  PosteriorRows g{mean_g, scale(log(prec_g), -0.5)};
  return scale(add(gaussian_kl(p, g), gaussian_kl(q, g)), 0.5);
}

MmdNoise MmdNoise::draw(std::size_t rows, int samples, std::size_t dim, std::mt19937_64& rng) {
  MmdNoise n;
  n.rows = rows;
  n.samples = samples;
  n.dim = dim;
  std::normal_distribution<double> normal;
  const std::size_t count = rows * static_cast<std::size_t>(samples) * dim;
  n.block_a.resize(count);
  n.block_b.resize(count);
  for (double& v : n.block_a) v = normal(rng);
  for (double& v : n.block_b) v = normal(rng);
  return n;
}

namespace {

// One assignment of the estimator for a single row: U(P(ea), Q(eb)). Gradients
// w.r.t. mean/log-std of both sides are accumulated with weight `w`.
double mmd_assignment(const double* mp, const double* lp, const double* mq, const double* lq, const double* ea,
                      const double* eb, int n, int d, double w, double* gmp, double* glp, double* gmq,
                      double* glq) {
  std::vector<double> xa(static_cast<std::size_t>(n) * d), xb(xa.size());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      xa[i * d + k] = mp[k] + std::exp(lp[k]) * ea[i * d + k];
      xb[i * d + k] = mq[k] + std::exp(lq[k]) * eb[i * d + k];
    }
  }
  const auto h = detail::median_bandwidth(xa.data(), xb.data(), n, d);
  if (!gmp) return detail::mmd_u_statistic(xa.data(), xb.data(), n, d, h.value, nullptr, nullptr);
  std::vector<double> ga(xa.size(), 0.0), gb(xb.size(), 0.0);
  double gh = 0.0;
  const double u = detail::mmd_u_statistic(xa.data(), xb.data(), n, d, h.value, ga.data(), gb.data(), &gh);
  if (h.first >= 0) {
    // The median is one pair's squared distance, so it moves with that pair.
    auto coord = [&](int i) { return i < n ? &ga[i * d] : &gb[(i - n) * d]; };
    auto point = [&](int i) { return i < n ? &xa[i * d] : &xb[(i - n) * d]; };
    double* g1 = coord(h.first);
    double* g2 = coord(h.second);
    const double* p1 = point(h.first);
    const double* p2 = point(h.second);
    for (int k = 0; k < d; ++k) {
      const double diff = 2.0 * gh * (p1[k] - p2[k]);
      g1[k] += diff;
      g2[k] -= diff;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      gmp[k] += w * ga[i * d + k];
      glp[k] += w * ga[i * d + k] * std::exp(lp[k]) * ea[i * d + k];
      gmq[k] += w * gb[i * d + k];
      glq[k] += w * gb[i * d + k] * std::exp(lq[k]) * eb[i * d + k];
    }
  }
  return u;
}

}  // namespace

Var mmd(const PosteriorRows& p, const PosteriorRows& q, const MmdNoise& noise) {
  const std::size_t rows = p.mean.rows(), dim = p.mean.cols();
  for (Var v : {p.log_std, q.mean, q.log_std}) {
    if (v.rows() != rows || v.cols() != dim) throw DimensionError("mmd: posterior rows disagree in shape");
  }
  if (noise.rows != rows || noise.dim != dim || noise.samples < 2) {
    throw DimensionError("mmd: noise drawn for a different batch shape");
  }
  const int n = noise.samples, d = static_cast<int>(dim);
  const std::size_t block = static_cast<std::size_t>(n) * dim;
  Tensor y = Tensor::matrix(rows, 1);
  const Tensor& mp = p.mean.value();
  const Tensor& lp = p.log_std.value();
  const Tensor& mq = q.mean.value();
  const Tensor& lq = q.log_std.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t o = r * dim;
    const double* ea = noise.block_a.data() + r * block;
    const double* eb = noise.block_b.data() + r * block;
    const double u1 = mmd_assignment(mp.data() + o, lp.data() + o, mq.data() + o, lq.data() + o, ea, eb, n, d, 0,
                                     nullptr, nullptr, nullptr, nullptr);
    const double u2 = mmd_assignment(mp.data() + o, lp.data() + o, mq.data() + o, lq.data() + o, eb, ea, n, d, 0,
                                     nullptr, nullptr, nullptr, nullptr);
    y[r] = 0.5 * (u1 + u2);
  }
  const std::vector<std::size_t> ids{p.mean.id(), p.log_std.id(), q.mean.id(), q.log_std.id()};
  return p.mean.tape()->push(OpKind::Mmd, ids, std::move(y), [ids, rows, dim, n, d, block, noise_copy = noise](Tape& t,
                                                                                                std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& mp = t.value(ids[0]);
    const Tensor& lp = t.value(ids[1]);
    const Tensor& mq = t.value(ids[2]);
    const Tensor& lq = t.value(ids[3]);
    Tensor gmp = Tensor::zeros_like(mp), glp = Tensor::zeros_like(lp);
    Tensor gmq = Tensor::zeros_like(mq), glq = Tensor::zeros_like(lq);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t o = r * dim;
      const double w = 0.5 * g[r];
      const double* ea = noise_copy.block_a.data() + r * block;
      const double* eb = noise_copy.block_b.data() + r * block;
      mmd_assignment(mp.data() + o, lp.data() + o, mq.data() + o, lq.data() + o, ea, eb, n, d, w, gmp.data() + o,
                     glp.data() + o, gmq.data() + o, glq.data() + o);
      mmd_assignment(mp.data() + o, lp.data() + o, mq.data() + o, lq.data() + o, eb, ea, n, d, w, gmp.data() + o,
                     glp.data() + o, gmq.data() + o, glq.data() + o);
    }
    const Tensor* parts[] = {&gmp, &glp, &gmq, &glq};
    for (std::size_t k = 0; k < 4; ++k)
      if (t.requires_grad(ids[k])) t.grad_buffer(ids[k]) += *parts[k];
  });
}

double mmd_bandwidth_gap(const PosteriorRows& p, const PosteriorRows& q, const MmdNoise& noise) {
  const std::size_t dim = p.mean.cols();
  const int n = noise.samples, d = static_cast<int>(dim);
  const std::size_t block = static_cast<std::size_t>(n) * dim;
  const Tensor& mp = p.mean.value();
  const Tensor& lp = p.log_std.value();
  const Tensor& mq = q.mean.value();
  const Tensor& lq = q.log_std.value();
  double gap = std::numeric_limits<double>::infinity();
  std::vector<double> xa(block), xb(block);
  for (std::size_t r = 0; r < p.mean.rows(); ++r) {
    const std::size_t o = r * dim;
    const double* blocks[] = {noise.block_a.data() + r * block, noise.block_b.data() + r * block};
    for (int assignment = 0; assignment < 2; ++assignment) {
      const double* ea = blocks[assignment];
      const double* eb = blocks[1 - assignment];
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) {
          xa[i * d + k] = mp[o + k] + std::exp(lp[o + k]) * ea[i * d + k];
          xb[i * d + k] = mq[o + k] + std::exp(lq[o + k]) * eb[i * d + k];
        }
      }
      gap = std::min(gap, detail::median_bandwidth(xa.data(), xb.data(), n, d).gap);
    }
  }
  return gap;
}

Var distance(ProximityKind kind, const PosteriorRows& p, const PosteriorRows& q, const MmdNoise* noise) {
  switch (kind) {
    case ProximityKind::Cosine: return cosine_distance(p.mean, q.mean);
    case ProximityKind::Hellinger: return hellinger(p, q);
    case ProximityKind::Kl: return gaussian_kl(p, q);
    case ProximityKind::GeneralizedJs: return generalized_js(p, q);
    case ProximityKind::Mmd:
      if (!noise) throw ContractError("distance: MMD requires a noise block");
      return mmd(p, q, *noise);
  }
  throw ContractError("distance: unknown proximity kind");
}

Var margin_loss(Var d_pos, Var d_negs, double margin) {
  if (d_negs.cols() == 0) throw ContractError("margin_loss: at least one negative distance is required");
  if (d_pos.rows() != d_negs.rows()) {
    throw DimensionError("margin_loss: " + std::to_string(d_pos.rows()) + " positives vs " +
                         std::to_string(d_negs.rows()) + " negative rows");
  }
  return relu(add_scalar(sub(d_pos, row_mean(d_negs)), margin));
}

}  // namespace pvae::proximity
