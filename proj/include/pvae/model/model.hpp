#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "pvae/autodiff/ops.hpp"
#include "pvae/gaussian.hpp"
#include "pvae/proximity/tape_proximity.hpp"
#include "pvae/similarity/similarity.hpp"

namespace pvae::model {

using similarity::Criterion;

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 128;
  /// Per encoder direction, and the decoder.
  std::size_t hidden = 128;
  std::size_t sem_dim = 64;
  std::size_t syn_dim = 16;
  double init_scale = 0.1;

  std::size_t latent_dim() const noexcept { return sem_dim + syn_dim; }
  std::size_t subspace_dim(Criterion c) const noexcept { return c == Criterion::Semantic ? sem_dim : syn_dim; }
  void validate() const;
};

inline constexpr Criterion kCriteria[] = {Criterion::Semantic, Criterion::Syntactic};

/// Subspace vectors in the fixed [semantic, syntactic] order.
struct LatentCode {
  std::vector<double> sem;
  std::vector<double> syn;

  std::vector<double> concatenated() const;
};

/// All trainable arrays. Parameter addresses are stable for the model's lifetime.
class Model {
 public:
  /// Uniform(-init_scale, init_scale) weights, zero biases, forget-gate bias 1.
  Model(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  std::vector<ad::Parameter>& parameters() noexcept { return params_; }
  const std::vector<ad::Parameter>& parameters() const noexcept { return params_; }
  ad::Parameter& param(const std::string& name);
  const ad::Parameter& param(const std::string& name) const;
  std::vector<ad::Parameter*> parameter_ptrs();

 private:
  void add(const std::string& name, std::size_t rows, std::size_t cols);

  ModelConfig config_;
  std::vector<ad::Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string criterion_prefix(Criterion c);

/// Binds parameters onto one tape, once each. Trainable binding records
/// leaves that receive gradients; frozen binding records constants.
class Graph {
 public:
  Graph(ad::Tape& tape, const Model& model, bool trainable);

  ad::Tape& tape() noexcept { return tape_; }
  const Model& model() const noexcept { return model_; }
  ad::Var operator[](const std::string& name);

 private:
  ad::Tape& tape_;
  const Model& model_;
  bool trainable_;
  std::unordered_map<std::string, ad::Var> bound_;
};

/// Padded, time-major view of a batch of id sequences.
struct SeqBatch {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<std::size_t> lengths;
  std::vector<int> ids;        // steps x batch, PAD past each length
  std::vector<double> mask;    // steps x batch, 1 inside each length

  /// Throws ContractError on an empty sequence.
  static SeqBatch from(const std::vector<std::vector<int>>& seqs);
  std::span<const int> ids_at(std::size_t t) const { return {ids.data() + t * batch, batch}; }
  std::span<const double> mask_at(std::size_t t) const { return {mask.data() + t * batch, batch}; }
};

/// Posterior rows [B x d] of criterion `c` for every sequence.
proximity::PosteriorRows encode_rows(Graph& g, Criterion c, const std::vector<std::vector<int>>& seqs);

/// Deterministic encoding of one sentence. Throws ContractError when empty.
GaussianPosterior encode(const Model& model, Criterion c, const std::vector<int>& ids);
/// Posterior per sentence, evaluated in chunks.
std::vector<GaussianPosterior> encode_batch(const Model& model, Criterion c,
                                            const std::vector<std::vector<int>>& seqs);

/// mu + sigma * eps with eps ~ N(0, I).
std::vector<double> reparameterize(const GaussianPosterior& q, std::mt19937_64& rng);
/// Row-wise mean + exp(log_std) * eps on the tape; eps is [B x d].
ad::Var reparameterize_rows(const proximity::PosteriorRows& q, const std::vector<double>& eps);

/// Sum over sentences of their per-token cross-entropies. `inputs` start with
/// BOS, `targets` are the same length and end with EOS. z is [B x latent].
ad::Var decoder_nll(Graph& g, ad::Var z, const std::vector<std::vector<int>>& inputs,
                    const std::vector<std::vector<int>>& targets);

/// Teacher-forced per-step logits ([1 x V] each) for a single sentence: step t
/// reads BOS then targets[0..t-1].
std::vector<ad::Var> teacher_forced_logits(Graph& g, ad::Var z, const std::vector<int>& targets);

/// Sum of per-step softmax cross-entropies. Throws ContractError on a length mismatch.
ad::Var reconstruction_loss(const std::vector<ad::Var>& logits, const std::vector<int>& targets);

/// Greedy decoding, ties to the lowest id. Stops at EOS (excluded) or max_len.
std::vector<std::vector<int>> greedy_decode(const Model& model, const std::vector<LatentCode>& codes,
                                            std::size_t max_len);
/// Ancestral sampling at `temperature`.
std::vector<std::vector<int>> sample_decode(const Model& model, const std::vector<LatentCode>& codes,
                                            std::size_t max_len, double temperature, std::mt19937_64& rng);

/// Row-wise KL(q || N(0, I)) as [B x 1].
ad::Var kl_rows(const proximity::PosteriorRows& q);

/// 1/2 sum_d (mu^2 + sigma^2 - 1 - ln sigma^2), summed over the given posteriors.
double kl_loss(const std::vector<GaussianPosterior>& subspaces);

/// cap * sigmoid((step - horizon/2) / (0.06 horizon)); 2500 and 300 at the default horizon.
double kl_weight(std::uint64_t step, double cap, std::uint64_t horizon = 5000);

/// Replaces each non-special id by UNK with probability `rate`.
std::vector<int> word_dropout(const std::vector<int>& ids, double rate, std::mt19937_64& rng);

}  // namespace pvae::model
