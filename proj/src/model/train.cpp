#include "pvae/model/train.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "pvae/data/vocab.hpp"
#include "pvae/errors.hpp"

namespace pvae::model {

using ad::Tensor;
using ad::Var;
using data::Vocab;

void TrainingConfig::validate() const {
  auto nonneg = [](double v, const char* what) {
    if (!(v >= 0.0 && std::isfinite(v))) throw ConfigError(std::string(what) + " must be a finite value >= 0");
  };
  nonneg(kl_cap, "lambda_kl");
  nonneg(lambda_sem, "lambda_sem");
  nonneg(lambda_syn, "lambda_syn");
  nonneg(clip_norm, "clip_norm");
  if (negatives < 1) throw ConfigError("negatives must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(word_dropout >= 0.0 && word_dropout < 1.0)) throw ConfigError("word_dropout must be in [0, 1)");
  if (batch_size < negatives + 2) {
    throw ConfigError("batch_size " + std::to_string(batch_size) + " is below negatives + 2");
  }
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (mmd_samples < 2) throw ConfigError("mmd_samples must be at least 2");
}

StepData StepData::from_batch(const data::Dataset& dataset, const similarity::Batch& batch) {
  StepData d;
  std::map<std::size_t, std::size_t> row_of;
  auto row = [&](std::size_t index) {
    auto [it, inserted] = row_of.try_emplace(index, d.sequences.size());
    if (inserted) d.sequences.push_back(dataset.examples.at(index).ids);
    return it->second;
  };
  for (std::size_t i : batch.indices) row(i);
  d.batch = d.sequences.size();
  for (std::size_t k = 0; k < batch.mined.size() && k < 2; ++k) {
    for (const auto& mp : batch.mined[k].pairs) {
      RowTuple t;
      t.anchor = row(mp.anchor);
      t.positive = row(mp.positive);
      for (std::size_t n : mp.negatives) t.negatives.push_back(row(n));
      d.tuples[k].push_back(std::move(t));
    }
  }
  return d;
}

StepNoise StepNoise::draw(const StepData& data, const ModelConfig& mc, const TrainingConfig& tc,
                          std::mt19937_64& rng) {
  StepNoise n;
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < 2; ++k) {
    n.eps[k].resize(data.batch * mc.subspace_dim(kCriteria[k]));
    for (double& v : n.eps[k]) v = normal(rng);
  }
  for (std::size_t b = 0; b < data.batch; ++b) {
    std::vector<int> in{Vocab::kBos};
    const auto& seq = data.sequences[b];
    in.insert(in.end(), seq.begin(), seq.end());
    n.decoder_inputs.push_back(word_dropout(in, tc.word_dropout, rng));
  }
  if (tc.proximity == proximity::ProximityKind::Mmd) {
    for (std::size_t k = 0; k < 2; ++k) {
      const std::size_t tuples = data.tuples[k].size();
      if (tuples == 0) continue;
      const std::size_t d = mc.subspace_dim(kCriteria[k]);
      n.mmd_pos[k] = proximity::MmdNoise::draw(tuples, tc.mmd_samples, d, rng);
      n.mmd_neg[k] = proximity::MmdNoise::draw(tuples * tc.negatives, tc.mmd_samples, d, rng);
    }
  }
  return n;
}

namespace {

proximity::PosteriorRows gather(const proximity::PosteriorRows& q, const std::vector<std::size_t>& rows) {
  return {ad::gather_rows(q.mean, rows), ad::gather_rows(q.log_std, rows)};
}

Var proximity_loss(const proximity::PosteriorRows& q, const std::vector<RowTuple>& tuples, const TrainingConfig& tc,
                   const std::optional<proximity::MmdNoise>& pos_noise,
                   const std::optional<proximity::MmdNoise>& neg_noise, std::vector<double>& kink_margins) {
  const std::size_t m = tc.negatives;
  std::vector<std::size_t> anchors, positives, anchors_rep, negatives;
  for (const auto& t : tuples) {
    if (t.negatives.size() != m) throw ContractError("every tuple must carry exactly m negatives");
    anchors.push_back(t.anchor);
    positives.push_back(t.positive);
    for (std::size_t n : t.negatives) {
      anchors_rep.push_back(t.anchor);
      negatives.push_back(n);
    }
  }
  const auto* pn = pos_noise ? &*pos_noise : nullptr;
  const auto* nn = neg_noise ? &*neg_noise : nullptr;
  Var d_pos = proximity::distance(tc.proximity, gather(q, anchors), gather(q, positives), pn);
  Var d_neg = proximity::distance(tc.proximity, gather(q, anchors_rep), gather(q, negatives), nn);
  Var d_negs = ad::reshape(d_neg, {tuples.size(), m});
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += d_negs.value()[t * m + j];
    kink_margins.push_back(tc.margin + d_pos.value()[t] - s / static_cast<double>(m));
  }
  if (pn) kink_margins.push_back(proximity::mmd_bandwidth_gap(gather(q, anchors), gather(q, positives), *pn));
  if (nn) kink_margins.push_back(proximity::mmd_bandwidth_gap(gather(q, anchors_rep), gather(q, negatives), *nn));
  return ad::mean(proximity::margin_loss(d_pos, d_negs, tc.margin));
}

}  // namespace

LossTerms build_loss(Graph& g, const StepData& data, const StepNoise& noise, const TrainingConfig& tc,
                     double kl_weight) {
  if (data.batch == 0 || data.batch > data.sequences.size()) throw ContractError("step has no batch rows");
  if (noise.decoder_inputs.size() != data.batch) throw ContractError("noise drawn for a different batch");
  ad::Tape& tape = g.tape();
  const double inv_b = 1.0 / static_cast<double>(data.batch);
  std::vector<std::size_t> batch_rows(data.batch);
  std::iota(batch_rows.begin(), batch_rows.end(), std::size_t{0});
  const bool extra = data.sequences.size() > data.batch;

  LossTerms out;
  Var z_parts[2];
  Var kl_total, prox_total;
  bool have_prox = false;
  for (std::size_t k = 0; k < 2; ++k) {
    const Criterion c = kCriteria[k];
    const auto q = encode_rows(g, c, data.sequences);
    const auto qb = extra ? gather(q, batch_rows) : q;
    z_parts[k] = reparameterize_rows(qb, noise.eps[k]);
    Var kl = ad::scale(ad::sum(kl_rows(qb)), inv_b);
    out.kl_sub[k] = kl;
    kl_total = k == 0 ? kl : ad::add(kl_total, kl);

    if (data.tuples[k].empty()) {
      out.prox[k] = tape.constant(Tensor::scalar(0.0));
      continue;
    }
    out.prox[k] = proximity_loss(q, data.tuples[k], tc, noise.mmd_pos[k], noise.mmd_neg[k], out.kink_margins[k]);
    const double lambda = tc.lambda(c);
    if (lambda == 0.0) continue;
    Var weighted = ad::scale(out.prox[k], lambda);
    prox_total = have_prox ? ad::add(prox_total, weighted) : weighted;
    have_prox = true;
  }

  Var z = ad::concat(z_parts[0], z_parts[1]);
  std::vector<std::vector<int>> targets;
  for (std::size_t b = 0; b < data.batch; ++b) {
    targets.push_back(data.sequences[b]);
    targets.back().push_back(Vocab::kEos);
  }
  out.rec = ad::scale(decoder_nll(g, z, noise.decoder_inputs, targets), inv_b);
  out.kl = kl_total;
  out.total = ad::add(out.rec, ad::scale(out.kl, kl_weight));
  if (have_prox) out.total = ad::add(out.total, prox_total);
  return out;
}

LossReport train_step(Model& model, ad::AdamState& adam, const StepData& data, const TrainingConfig& tc,
                      std::uint64_t step, std::mt19937_64& rng) {
  const StepNoise noise = StepNoise::draw(data, model.config(), tc, rng);
  LossReport r;
  r.step = step;
  r.kl_weight = kl_weight(step, tc.kl_cap, tc.anneal_horizon);
  r.tuples_sem = data.tuples[0].size();
  r.tuples_syn = data.tuples[1].size();

  ad::Tape tape;
  Graph g(tape, model, true);
  const LossTerms terms = build_loss(g, data, noise, tc, r.kl_weight);
  r.rec = terms.rec.item();
  r.prox_sem = terms.prox[0].item();
  r.prox_syn = terms.prox[1].item();
  r.total = terms.total.item();
  r.kl_sem = terms.kl_sub[0].item();
  r.kl_syn = terms.kl_sub[1].item();

  if (!std::isfinite(r.total)) {
    r.finite = false;
    std::ostringstream os;
    os << "non-finite loss at step " << step << ": rec=" << r.rec << " kl=" << terms.kl.item()
       << " prox_sem=" << r.prox_sem << " prox_syn=" << r.prox_syn;
    r.diagnostics = os.str();
    return r;
  }

  ad::GradientMap grads = tape.backward(terms.total);
  auto params = model.parameter_ptrs();
  std::vector<Tensor> g_list;
  g_list.reserve(params.size());
  for (auto* p : params) {
    auto it = grads.find(p);
    g_list.push_back(it != grads.end() ? std::move(it->second) : Tensor::zeros_like(p->value));
  }
  for (std::size_t i = 0; i < g_list.size(); ++i) {
    if (!g_list[i].all_finite()) {
      r.finite = false;
      r.diagnostics = "non-finite gradient for '" + params[i]->name + "' at step " + std::to_string(step);
      return r;
    }
  }
  if (tc.clip_norm > 0.0) {
    r.grad_norm = ad::clip_global_norm(g_list, tc.clip_norm);
  } else {
    double s = 0.0;
    for (const auto& t : g_list) {
      for (double v : t.values()) s += v * v;
    }
    r.grad_norm = std::sqrt(s);
  }
  ad::adam_step(params, g_list, adam, tc.learning_rate);
  return r;
}

std::vector<EpochReport> train(Model& model, const data::Dataset& dataset,
                               const std::vector<similarity::SimilarityCriterion>& criteria, const TrainingConfig& tc,
                               const EpochCallback& on_epoch) {
  tc.validate();
  if (criteria.size() != 2 || criteria[0].name != Criterion::Semantic || criteria[1].name != Criterion::Syntactic) {
    throw ConfigError("training expects a semantic and a syntactic criterion, in that order");
  }
  for (const auto& c : criteria) c.validate();
  if (dataset.examples.size() < tc.batch_size) throw ConfigError("dataset is smaller than one batch");
  for (const auto& ex : dataset.examples) {
    if (ex.ids.empty()) throw DataError("example '" + ex.text + "' has no token ids");
  }

  std::vector<similarity::FallbackIndex> fallback;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    fallback.push_back(similarity::FallbackIndex::build(dataset.examples, criteria[k], tc.seed + 7919 * (k + 1)));
  }
  const std::vector<const similarity::FallbackIndex*> fb{&fallback[0], &fallback[1]};

  std::mt19937_64 rng(tc.seed);
  ad::AdamState adam;
  std::uint64_t step = 0;
  std::vector<EpochReport> reports;
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    const auto batches =
        similarity::make_batches(dataset.examples, tc.batch_size, tc.seed, epoch, criteria, tc.negatives, fb);
    EpochReport er;
    er.epoch = epoch;
    for (const auto& batch : batches) {
      for (const auto& m : batch.mined) er.skipped_anchors += m.skipped;
      const StepData data = StepData::from_batch(dataset, batch);
      const LossReport r = train_step(model, adam, data, tc, step, rng);
      if (!r.finite) throw NumericError(r.diagnostics);
      ++step;
      ++er.steps;
      er.step_totals.push_back(r.total);
      er.mean.rec += r.rec;
      er.mean.kl_sem += r.kl_sem;
      er.mean.kl_syn += r.kl_syn;
      er.mean.prox_sem += r.prox_sem;
      er.mean.prox_syn += r.prox_syn;
      er.mean.total += r.total;
      er.mean.grad_norm += r.grad_norm;
      er.mean.kl_weight = r.kl_weight;
      er.mean.tuples_sem += r.tuples_sem;
      er.mean.tuples_syn += r.tuples_syn;
    }
    const double inv = er.steps ? 1.0 / static_cast<double>(er.steps) : 0.0;
    for (double* v : {&er.mean.rec, &er.mean.kl_sem, &er.mean.kl_syn, &er.mean.prox_sem, &er.mean.prox_syn,
                      &er.mean.total, &er.mean.grad_norm}) {
      *v *= inv;
    }
    er.mean.step = step;
    if (on_epoch) on_epoch(er);
    reports.push_back(std::move(er));
  }
  return reports;
}

}  // namespace pvae::model
