#include "pvae/model/model.hpp"

#include <algorithm>
#include <cmath>

#include "pvae/data/vocab.hpp"
#include "pvae/errors.hpp"

namespace pvae::model {

using ad::Tensor;
using ad::Var;
using data::Vocab;

void ModelConfig::validate() const {
  if (vocab_size <= Vocab::kNumSpecials) throw ConfigError("vocab_size must exceed the special tokens");
  if (embed_dim == 0 || hidden == 0 || sem_dim == 0 || syn_dim == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be non-negative");
}

std::vector<double> LatentCode::concatenated() const {
  std::vector<double> z(sem);
  z.insert(z.end(), syn.begin(), syn.end());
  return z;
}

std::string criterion_prefix(Criterion c) { return c == Criterion::Semantic ? "enc.sem." : "enc.syn."; }

Model::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const std::size_t v = config_.vocab_size, e = config_.embed_dim, h = config_.hidden, z = config_.latent_dim();
  params_.reserve(32);
  add("embedding", v, e);
  for (Criterion c : kCriteria) {
    const std::string p = criterion_prefix(c);
    const std::size_t d = config_.subspace_dim(c);
    add(p + "fwd.w", e + h, 4 * h);
    add(p + "fwd.b", 1, 4 * h);
    add(p + "bwd.w", e + h, 4 * h);
    add(p + "bwd.b", 1, 4 * h);
    add(p + "mu.w", 2 * h, d);
    add(p + "mu.b", 1, d);
    add(p + "logstd.w", 2 * h, d);
    add(p + "logstd.b", 1, d);
  }
  add("dec.init.w", z, h);
  add("dec.init.b", 1, h);
  add("dec.lstm.w", e + z + h, 4 * h);
  add("dec.lstm.b", 1, 4 * h);
  add("dec.out.w", h, v);
  add("dec.out.b", 1, v);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-config_.init_scale, config_.init_scale);
  for (auto& p : params_) {
    const bool bias = p.name.size() >= 2 && p.name.compare(p.name.size() - 2, 2, ".b") == 0;
    if (bias) continue;
    for (double& x : p.value.values()) x = u(rng);
  }
  for (const char* name : {"enc.sem.fwd.b", "enc.sem.bwd.b", "enc.syn.fwd.b", "enc.syn.bwd.b", "dec.lstm.b"}) {
    auto& b = param(name).value;
    for (std::size_t j = h; j < 2 * h; ++j) b[j] = 1.0;
  }
}

void Model::add(const std::string& name, std::size_t rows, std::size_t cols) {
  index_[name] = params_.size();
  params_.push_back({name, Tensor::matrix(rows, cols)});
}

ad::Parameter& Model::param(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw IndexError("no parameter named '" + name + "'");
  return params_[it->second];
}

const ad::Parameter& Model::param(const std::string& name) const {
  return const_cast<Model*>(this)->param(name);
}

std::vector<ad::Parameter*> Model::parameter_ptrs() {
  std::vector<ad::Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

Graph::Graph(ad::Tape& tape, const Model& model, bool trainable)
    : tape_(tape), model_(model), trainable_(trainable) {}

Var Graph::operator[](const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  const ad::Parameter& p = model_.param(name);
  Var v = trainable_ ? tape_.param(p) : tape_.constant(p.value);
  bound_.emplace(name, v);
  return v;
}

SeqBatch SeqBatch::from(const std::vector<std::vector<int>>& seqs) {
  SeqBatch s;
  s.batch = seqs.size();
  for (const auto& q : seqs) {
    if (q.empty()) throw ContractError("cannot process an empty token sequence");
    s.lengths.push_back(q.size());
    s.steps = std::max(s.steps, q.size());
  }
  s.ids.assign(s.steps * s.batch, Vocab::kPad);
  s.mask.assign(s.steps * s.batch, 0.0);
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t t = 0; t < seqs[b].size(); ++t) {
      s.ids[t * s.batch + b] = seqs[b][t];
      s.mask[t * s.batch + b] = 1.0;
    }
  }
  return s;
}

namespace {

void check_ids(const std::vector<std::vector<int>>& seqs, std::size_t vocab) {
  for (const auto& q : seqs) {
    for (int id : q) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
        throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(vocab));
      }
    }
  }
}

Var zeros(ad::Tape& tape, std::size_t rows, std::size_t cols) { return tape.constant(Tensor::matrix(rows, cols)); }

/// Final hidden state of one LSTM direction over a padded batch.
Var run_direction(Graph& g, const std::string& prefix, const SeqBatch& s) {
  const std::size_t h = g.model().config().hidden;
  Var emb = g["embedding"], w = g[prefix + ".w"], b = g[prefix + ".b"];
  Var state = zeros(g.tape(), s.batch, 2 * h);
  for (std::size_t t = 0; t < s.steps; ++t) {
    const auto ids = s.ids_at(t);
    Var x = ad::gather_rows(emb, std::vector<std::size_t>(ids.begin(), ids.end()));
    Var in = ad::concat(x, ad::slice(state, 0, h));
    state = ad::lstm_cell(ad::add_row(ad::matmul(in, w), b), state, s.mask_at(t));
  }
  return ad::slice(state, 0, h);
}

Var decoder_start(Graph& g, Var z) {
  const std::size_t h = g.model().config().hidden;
  Var h0 = ad::add_row(ad::matmul(z, g["dec.init.w"]), g["dec.init.b"]);
  return ad::concat(h0, zeros(g.tape(), z.rows(), h));
}

/// Advances the decoder one step and returns the [B x V] logits.
Var decoder_step(Graph& g, Var z, Var& state, std::span<const int> ids, std::span<const double> mask) {
  const std::size_t h = g.model().config().hidden;
  Var x = ad::gather_rows(g["embedding"], std::vector<std::size_t>(ids.begin(), ids.end()));
  const Var parts[] = {x, z, ad::slice(state, 0, h)};
  Var gates = ad::add_row(ad::matmul(ad::concat(parts), g["dec.lstm.w"]), g["dec.lstm.b"]);
  state = ad::lstm_cell(gates, state, mask);
  return ad::add_row(ad::matmul(ad::slice(state, 0, h), g["dec.out.w"]), g["dec.out.b"]);
}

Var code_rows(ad::Tape& tape, const std::vector<LatentCode>& codes, std::size_t latent) {
  std::vector<double> data;
  for (const auto& c : codes) {
    auto z = c.concatenated();
    if (z.size() != latent) {
      throw ContractError("latent code has " + std::to_string(z.size()) + " dims, decoder expects " +
                          std::to_string(latent));
    }
    data.insert(data.end(), z.begin(), z.end());
  }
  return tape.constant(Tensor({codes.size(), latent}, std::move(data)));
}

template <class Pick>
std::vector<std::vector<int>> generate(const Model& model, const std::vector<LatentCode>& codes, std::size_t max_len,
                                       Pick pick) {
  if (max_len < 1) throw ContractError("max_len must be at least 1");
  std::vector<std::vector<int>> out(codes.size());
  if (codes.empty()) return out;
  ad::Tape tape;
  Graph g(tape, model, false);
  Var z = code_rows(tape, codes, model.config().latent_dim());
  Var state = decoder_start(g, z);
  const std::size_t b = codes.size();
  std::vector<int> prev(b, Vocab::kBos);
  std::vector<char> done(b, 0);
  const std::vector<double> ones(b, 1.0);
  for (std::size_t t = 0; t < max_len; ++t) {
    Var logits = decoder_step(g, z, state, prev, ones);
    bool all_done = true;
    for (std::size_t r = 0; r < b; ++r) {
      if (done[r]) continue;
      const int id = pick(logits.value().row_span(r));
      prev[r] = id;
      if (id == Vocab::kEos) {
        done[r] = 1;
      } else {
        out[r].push_back(id);
        all_done = false;
      }
    }
    if (all_done) break;
  }
  return out;
}

}  // namespace

proximity::PosteriorRows encode_rows(Graph& g, Criterion c, const std::vector<std::vector<int>>& seqs) {
  check_ids(seqs, g.model().config().vocab_size);
  const SeqBatch fwd = SeqBatch::from(seqs);
  std::vector<std::vector<int>> reversed(seqs);
  for (auto& q : reversed) std::reverse(q.begin(), q.end());
  const SeqBatch bwd = SeqBatch::from(reversed);

  const std::string p = criterion_prefix(c);
  Var hidden = ad::concat(run_direction(g, p + "fwd", fwd), run_direction(g, p + "bwd", bwd));
  Var mean = ad::add_row(ad::matmul(hidden, g[p + "mu.w"]), g[p + "mu.b"]);
  Var log_std = ad::add_row(ad::matmul(hidden, g[p + "logstd.w"]), g[p + "logstd.b"]);
  return {mean, log_std};
}

GaussianPosterior encode(const Model& model, Criterion c, const std::vector<int>& ids) {
  return encode_batch(model, c, {ids}).front();
}

std::vector<GaussianPosterior> encode_batch(const Model& model, Criterion c,
                                            const std::vector<std::vector<int>>& seqs) {
  constexpr std::size_t kChunk = 64;
  std::vector<GaussianPosterior> out;
  out.reserve(seqs.size());
  for (std::size_t s = 0; s < seqs.size(); s += kChunk) {
    std::vector<std::vector<int>> chunk(seqs.begin() + s, seqs.begin() + std::min(seqs.size(), s + kChunk));
    ad::Tape tape;
    Graph g(tape, model, false);
    const auto rows = encode_rows(g, c, chunk);
    const Tensor& mu = rows.mean.value();
    const Tensor& ls = rows.log_std.value();
    for (std::size_t r = 0; r < chunk.size(); ++r) {
      GaussianPosterior q;
      const auto m = mu.row_span(r), l = ls.row_span(r);
      q.mean.assign(m.begin(), m.end());
      for (double x : l) q.stddev.push_back(std::exp(x));
      out.push_back(std::move(q));
    }
  }
  return out;
}

std::vector<double> reparameterize(const GaussianPosterior& q, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> z(q.dim());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = q.mean[i] + q.stddev[i] * normal(rng);
  return z;
}

Var reparameterize_rows(const proximity::PosteriorRows& q, const std::vector<double>& eps) {
  Var noise = q.mean.tape()->constant(Tensor(q.mean.shape(), eps));
  return ad::add(q.mean, ad::mul(ad::exp(q.log_std), noise));
}

Var decoder_nll(Graph& g, Var z, const std::vector<std::vector<int>>& inputs,
                const std::vector<std::vector<int>>& targets) {
  if (inputs.size() != targets.size() || inputs.size() != z.rows()) {
    throw ContractError("decoder batch sizes disagree");
  }
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    if (inputs[b].size() != targets[b].size()) throw ContractError("decoder inputs and targets differ in length");
  }
  check_ids(inputs, g.model().config().vocab_size);
  check_ids(targets, g.model().config().vocab_size);
  const SeqBatch in = SeqBatch::from(inputs);
  const SeqBatch out = SeqBatch::from(targets);
  Var state = decoder_start(g, z);
  Var total;
  for (std::size_t t = 0; t < in.steps; ++t) {
    Var logits = decoder_step(g, z, state, in.ids_at(t), in.mask_at(t));
    Var xent = ad::softmax_cross_entropy(logits, out.ids_at(t), out.mask_at(t));
    total = t == 0 ? xent : ad::add(total, xent);
  }
  return total;
}

std::vector<Var> teacher_forced_logits(Graph& g, Var z, const std::vector<int>& targets) {
  if (targets.empty()) throw ContractError("teacher forcing needs at least one target");
  if (z.rows() != 1) throw ContractError("teacher_forced_logits takes a single latent row");
  if (z.cols() != g.model().config().latent_dim()) throw ContractError("latent code width mismatch");
  check_ids({targets}, g.model().config().vocab_size);
  Var state = decoder_start(g, z);
  std::vector<Var> out;
  int prev = Vocab::kBos;
  const double one[] = {1.0};
  for (int target : targets) {
    const int ids[] = {prev};
    out.push_back(decoder_step(g, z, state, ids, one));
    prev = target;
  }
  return out;
}

Var reconstruction_loss(const std::vector<Var>& logits, const std::vector<int>& targets) {
  if (logits.size() != targets.size() || logits.empty()) {
    throw ContractError("reconstruction_loss: " + std::to_string(logits.size()) + " steps for " +
                        std::to_string(targets.size()) + " targets");
  }
  Var total = ad::softmax_cross_entropy(logits[0], targets[0]);
  for (std::size_t t = 1; t < logits.size(); ++t) {
    total = ad::add(total, ad::softmax_cross_entropy(logits[t], targets[t]));
  }
  return total;
}

std::vector<std::vector<int>> greedy_decode(const Model& model, const std::vector<LatentCode>& codes,
                                            std::size_t max_len) {
  return generate(model, codes, max_len, [](std::span<const double> row) {
    return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  });
}

std::vector<std::vector<int>> sample_decode(const Model& model, const std::vector<LatentCode>& codes,
                                            std::size_t max_len, double temperature, std::mt19937_64& rng) {
  if (!(temperature > 0.0)) throw ContractError("sampling temperature must be positive");
  return generate(model, codes, max_len, [&](std::span<const double> row) {
    std::vector<double> scaled(row.begin(), row.end());
    for (double& x : scaled) x /= temperature;
    const auto p = ad::softmax(scaled);
    std::discrete_distribution<int> pick(p.begin(), p.end());
    return pick(rng);
  });
}

Var kl_rows(const proximity::PosteriorRows& q) {
  // 1/2 (mu^2 + sigma^2 - 1) - log sigma
  Var var = ad::exp(ad::scale(q.log_std, 2.0));
  Var half = ad::scale(ad::add_scalar(ad::add(ad::square(q.mean), var), -1.0), 0.5);
  return ad::row_sum(ad::sub(half, q.log_std));
}

double kl_loss(const std::vector<GaussianPosterior>& subspaces) {
  double total = 0.0;
  for (const auto& q : subspaces) {
    q.validate();
    for (std::size_t d = 0; d < q.dim(); ++d) {
      const double s2 = q.stddev[d] * q.stddev[d];
      total += 0.5 * (q.mean[d] * q.mean[d] + s2 - 1.0 - std::log(s2));
    }
  }
  return total;
}

double kl_weight(std::uint64_t step, double cap, std::uint64_t horizon) {
  if (horizon == 0) return cap;
  const double mid = 0.5 * static_cast<double>(horizon);
  const double temp = 0.06 * static_cast<double>(horizon);
  return cap / (1.0 + std::exp(-(static_cast<double>(step) - mid) / temp));
}

std::vector<int> word_dropout(const std::vector<int>& ids, double rate, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ContractError("word dropout rate must be in [0, 1)");
  std::vector<int> out(ids);
  if (rate == 0.0) return out;
  std::bernoulli_distribution drop(rate);
  for (int& id : out) {
    if (!Vocab::is_special(id) && drop(rng)) id = Vocab::kUnk;
  }
  return out;
}

}  // namespace pvae::model
