#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pvae/data/example.hpp"

namespace pvae::data {

struct SentencePair {
  SentenceExample a;
  SentenceExample b;
  EntailmentLabel label = EntailmentLabel::Neutral;
};

struct PairLoadResult {
  std::vector<SentencePair> pairs;
  std::size_t total_lines = 0;
  std::size_t malformed = 0;
  /// "line N: reason" for every skipped line.
  std::vector<std::string> diagnostics;
};

/// Reads a tab-separated pair file: sentence_a, sentence_b, label and
/// optionally bracketed parse_a, parse_b. Malformed lines are skipped and
/// reported. Throws IoError when unreadable, DataError when the file is empty
/// or more than 10% of its lines are malformed.
PairLoadResult load_pairs(const std::string& path);

/// Flattens pairs into examples; both sides of pair k get pair_id k and the pair label.
std::vector<SentenceExample> flatten_pairs(const std::vector<SentencePair>& pairs);

}  // namespace pvae::data
