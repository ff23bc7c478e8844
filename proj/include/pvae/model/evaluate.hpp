#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "pvae/data/example.hpp"
#include "pvae/metrics/correlation.hpp"
#include "pvae/metrics/ngram_lm.hpp"
#include "pvae/metrics/transfer.hpp"
#include "pvae/model/model.hpp"

namespace pvae::model {

inline constexpr std::size_t kMaxDecodeLength = 30;

/// Recovers a constituent skeleton for a generated sentence, or nullopt.
using OutputParser = std::function<std::optional<metrics::ParseTree>(const metrics::Tokens&)>;

/// Skeleton of the nearest synthetic template within token edit distance 2.
std::optional<metrics::ParseTree> template_parser(const metrics::Tokens& tokens);

/// (x_sem, x_syn) index pairs of distinct examples. When factor ids are
/// present, the two sources differ in both content and template.
std::vector<std::pair<std::size_t, std::size_t>> transfer_pairs(const std::vector<data::SentenceExample>& examples,
                                                                std::size_t count, std::uint64_t seed);

struct TransferOutcome {
  metrics::TransferReport report;
  std::vector<metrics::TransferItem> items;
};

/// z_sem ~ q_sem(x_sem), z_syn ~ q_syn(x_syn), greedy decode; BLEU of the
/// output against both sources and TED of the recovered output skeleton
/// against both source skeletons. Sources must carry parses.
TransferOutcome transfer_eval(const Model& model, const data::Dataset& dataset,
                              const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::uint64_t seed,
                              const OutputParser& parser = template_parser);

/// Cross-subspace correlation of posterior means.
metrics::CorrelationSummary subspace_correlation(const Model& model, const std::vector<std::vector<int>>& seqs);

/// Corpus BLEU (x100) of greedy reconstructions from sampled posterior codes.
double reconstruction_bleu(const Model& model, const data::Dataset& dataset, const std::vector<std::size_t>& indices,
                           std::uint64_t seed);

/// Greedy decodes of `count` prior draws z ~ N(0, I).
std::vector<std::vector<int>> sample_prior(const Model& model, std::size_t count, std::uint64_t seed);

/// Forward perplexity of prior samples under `lm`.
double sample_forward_ppl(const Model& model, const data::Vocab& vocab, const metrics::NGramLM& lm,
                          std::size_t count, std::uint64_t seed);

}  // namespace pvae::model
