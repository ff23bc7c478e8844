#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pvae/autodiff/adam.hpp"
#include "pvae/autodiff/grad_check.hpp"
#include "pvae/data/example.hpp"
#include "pvae/model/model.hpp"
#include "pvae/proximity/proximity.hpp"
#include "pvae/similarity/similarity.hpp"

namespace pvae::model {

struct TrainingConfig {
  double kl_cap = 0.3;
  double lambda_sem = 1.0;
  double lambda_syn = 1.0;
  std::size_t negatives = 5;
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  std::uint64_t anneal_horizon = 5000;
  double word_dropout = 0.3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  double margin = 1.0;
  proximity::ProximityKind proximity = proximity::ProximityKind::Cosine;
  int mmd_samples = 32;
  /// Global gradient-norm ceiling; 0 disables clipping.
  double clip_norm = 5.0;

  double lambda(Criterion c) const noexcept { return c == Criterion::Semantic ? lambda_sem : lambda_syn; }
  void validate() const;
};

/// One anchor/positive/negatives tuple in row space of StepData::sequences.
struct RowTuple {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::vector<std::size_t> negatives;
};

/// Everything one step reads. The first `batch` sequences are the batch
/// proper; later ones are extra positives pulled in by mining.
struct StepData {
  std::vector<std::vector<int>> sequences;
  std::size_t batch = 0;
  /// Indexed like kCriteria.
  std::vector<RowTuple> tuples[2];

  /// Gathers the batch and any out-of-batch positives into row space.
  static StepData from_batch(const data::Dataset& dataset, const similarity::Batch& batch);
};

/// All randomness of one step, drawn up front so the loss is a pure function
/// of the parameters (which is what the gradient check needs).
struct StepNoise {
  std::vector<double> eps[2];  // batch x subspace dim
  std::vector<std::vector<int>> decoder_inputs;
  /// MMD noise for the positive and the negative distances of each criterion.
  std::optional<proximity::MmdNoise> mmd_pos[2];
  std::optional<proximity::MmdNoise> mmd_neg[2];

  static StepNoise draw(const StepData& data, const ModelConfig& mc, const TrainingConfig& tc, std::mt19937_64& rng);
};

struct LossTerms {
  ad::Var total;
  ad::Var rec;
  ad::Var kl;
  ad::Var kl_sub[2];
  ad::Var prox[2];
  /// Distances to the nearest non-smooth point of the objective: each tuple's
  /// pre-activation hinge value, plus median-bandwidth gaps under MMD.
  std::vector<double> kink_margins[2];
};

/// L_rec + kl_weight * L_kl + sum_c lambda_c L_c. L_rec is summed over tokens
/// and averaged over the batch; L_kl sums subspaces; L_c averages the hinge
/// over the criterion's tuples (0 when there are none).
LossTerms build_loss(Graph& g, const StepData& data, const StepNoise& noise, const TrainingConfig& tc,
                     double kl_weight);

struct LossReport {
  std::uint64_t step = 0;
  double kl_weight = 0.0;
  double rec = 0.0;
  double kl_sem = 0.0;
  double kl_syn = 0.0;
  double prox_sem = 0.0;
  double prox_syn = 0.0;
  double total = 0.0;
  double grad_norm = 0.0;
  std::size_t tuples_sem = 0;
  std::size_t tuples_syn = 0;
  bool finite = true;
  std::string diagnostics;
};

/// One optimisation step. Values in the report are from before the update.
/// A non-finite loss or gradient leaves the parameters untouched and is
/// flagged in the report.
LossReport train_step(Model& model, ad::AdamState& adam, const StepData& data, const TrainingConfig& tc,
                      std::uint64_t step, std::mt19937_64& rng);

struct EpochReport {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  LossReport mean;
  std::vector<double> step_totals;
  std::size_t skipped_anchors = 0;
};

using EpochCallback = std::function<void(const EpochReport&)>;

/// Full training loop; throws NumericError if a step goes non-finite.
std::vector<EpochReport> train(Model& model, const data::Dataset& dataset,
                               const std::vector<similarity::SimilarityCriterion>& criteria, const TrainingConfig& tc,
                               const EpochCallback& on_epoch = {});

/// Kink margins below this make a check point kink-adjacent.
inline constexpr double kKinkClearance = 1e-2;

struct MicroGradCheck {
  ad::GradCheckResult result;
  /// Candidate points skipped for a kink margin below kKinkClearance.
  std::size_t kink_adjacent_skipped = 0;
  double clearance = 0.0;
};

/// Finite-difference check of the full objective over every parameter of a
/// micro model (vocab 5, embed 4, hidden 4, dims 3 + 2) on a fixed batch of
/// short sentences with hand-built tuples and frozen noise. Kink-adjacent
/// points are skipped by redrawing the parameter perturbation. Uses the
/// five-point stencil: small latent means make cosine distance sharply curved.
MicroGradCheck micro_objective_grad_check(std::uint64_t seed,
                                          proximity::ProximityKind kind = proximity::ProximityKind::Cosine,
                                          double h = 1e-4);

}  // namespace pvae::model
