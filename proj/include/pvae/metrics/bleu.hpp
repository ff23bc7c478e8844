#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pvae::metrics {

using Tokens = std::vector<std::string>;

/// Clipped n-gram match counts for one or more candidate/reference pairs.
struct BleuStats {
  int max_n = 4;
  std::vector<std::size_t> matched;  // per order, 1..max_n
  std::vector<std::size_t> total;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  explicit BleuStats(int max_n = 4);
  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(const Tokens& candidate, const Tokens& reference, int max_n = 4);

/// Geometric mean of modified precisions times the brevity penalty, in [0, 1].
/// Orders n >= 2 with no match use (0 + 1) / (total + 1); a zero unigram
/// match is not smoothed, so the score is 0.
double bleu_from_stats(const BleuStats& stats);

/// Sentence-level score in [0, 1]; an empty candidate scores 0.
double sentence_bleu(const Tokens& candidate, const Tokens& reference, int max_n = 4);

/// Corpus-level score in [0, 1]: counts are pooled before the geometric mean.
double corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references, int max_n = 4);

}  // namespace pvae::metrics
