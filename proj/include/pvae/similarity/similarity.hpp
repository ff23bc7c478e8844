#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pvae/data/example.hpp"

namespace pvae::similarity {

enum class Criterion { Semantic, Syntactic };

enum class Variant { Entailment, WordOverlap, TedThreshold, Length, GroundTruthFactor };

std::string to_string(Criterion c);
std::string to_string(Variant v);
/// Accepts entailment, wo / word_overlap, ted / ted_threshold, len / length,
/// gt / ground_truth_factor. Throws ConfigError otherwise.
Variant parse_variant(const std::string& name);

struct SimilarityCriterion {
  Criterion name = Criterion::Semantic;
  Variant variant = Variant::GroundTruthFactor;
  /// BLEU floor for WordOverlap, TED ceiling for TedThreshold, token
  /// tolerance for Length. Ignored by the other variants.
  double threshold = 0.0;

  /// Criterion with the variant's default threshold (0.3, 3, 1).
  static SimilarityCriterion make(Criterion name, Variant variant);
  void validate() const;
};

/// Binary similarity label. Symmetric and reflexive for every variant.
/// Throws DataError naming the example when a required field is missing.
bool sim_label(const data::SentenceExample& a, const data::SentenceExample& b, const SimilarityCriterion& c);

/// One anchor with its positive and m negatives; all are dataset indices.
struct MinedPair {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::vector<std::size_t> negatives;
  Criterion criterion = Criterion::Semantic;
};

struct MiningResult {
  std::vector<MinedPair> pairs;
  std::size_t skipped = 0;
};

/// Per example, one similar example elsewhere in the dataset (or none). Built
/// from exact-match buckets first, then up to `probes` random candidates.
class FallbackIndex {
 public:
  FallbackIndex() = default;
  static FallbackIndex build(const std::vector<data::SentenceExample>& examples, const SimilarityCriterion& c,
                             std::uint64_t seed, std::size_t probes = 64);

  std::optional<std::size_t> positive(std::size_t i) const;
  std::size_t size() const noexcept { return positive_.size(); }
  std::size_t coverage() const;

 private:
  std::vector<std::optional<std::size_t>> positive_;
};

/// For each anchor in `batch`, a uniformly drawn in-batch positive (else the
/// fallback positive, when given) and m distinct in-batch negatives drawn
/// uniformly. Anchors without a positive or with fewer than m negatives are
/// skipped and counted. Throws ConfigError if the batch holds fewer than m + 2
/// examples.
MiningResult mine_pairs(const std::vector<data::SentenceExample>& examples, const std::vector<std::size_t>& batch,
                        const SimilarityCriterion& c, std::size_t m, std::mt19937_64& rng,
                        const FallbackIndex* fallback = nullptr);

/// A shuffled batch with mined tuples for every criterion (same order as the
/// criteria passed in). Batches smaller than m + 2 carry no tuples.
struct Batch {
  std::vector<std::size_t> indices;
  std::vector<MiningResult> mined;
};

/// Partition of [0, n) for one epoch. The shuffle seed folds in the epoch, so
/// epochs differ but each is reproducible. The last short batch is kept.
std::vector<std::vector<std::size_t>> epoch_partition(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                      std::size_t epoch);

/// Throws ConfigError if batch_size < m + 2.
std::vector<Batch> make_batches(const std::vector<data::SentenceExample>& examples, std::size_t batch_size,
                                std::uint64_t seed, std::size_t epoch, const std::vector<SimilarityCriterion>& criteria,
                                std::size_t m, const std::vector<const FallbackIndex*>& fallbacks = {});

}  // namespace pvae::similarity
