#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pvae::metrics {

/// Interpolated Kneser-Ney n-gram model with a fixed absolute discount.
/// Highest order uses raw counts, lower orders continuation counts, and the
/// recursion bottoms out in a uniform distribution over the vocabulary.
/// Sentences are padded with order-1 "<s>" and one "</s>"; words seen only
/// once at training time are folded into "<unk>".
class NGramLM {
 public:
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";
  static constexpr const char* kUnk = "<unk>";

  using Sentence = std::vector<std::string>;

  static NGramLM train(const std::vector<Sentence>& corpus, int order = 3, double discount = 0.75);
  /// Same as train() with each sentence counted `multiplicity` times.
  static NGramLM train_weighted(const std::vector<std::pair<Sentence, std::uint64_t>>& corpus, int order = 3,
                                double discount = 0.75);
  /// Untrained fallback: order 1, uniform over `vocab_size` outcomes.
  static NGramLM uniform(std::size_t vocab_size);

  int order() const noexcept { return order_; }
  double discount() const noexcept { return discount_; }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }
  /// Predictable outcomes: kept words, "<unk>" and "</s>".
  const std::vector<std::string>& vocabulary() const noexcept { return vocab_; }

  /// P(word | context). Only the last order-1 context tokens are used; the
  /// context may contain "<s>". Unknown words map to "<unk>".
  double prob(std::span<const std::string> context, const std::string& word) const;

  /// Natural-log probability of the padded sentence, and its token count (words + "</s>").
  std::pair<double, std::size_t> sentence_log_prob(const Sentence& sentence) const;

 private:
  struct ContextStats {
    std::map<int, double> counts;  // next word -> (adjusted) count
    double total = 0.0;
  };

  int id_of(const std::string& w) const;
  double prob_ids(const int* context, int context_len, int word) const;
  void build(const std::vector<std::pair<std::vector<int>, std::uint64_t>>& sentences);

  int order_ = 1;
  double discount_ = 0.75;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  int bos_id_ = -1;
  // tables_[k] holds order-(k+1) statistics keyed by the k-token context.
  std::vector<std::map<std::vector<int>, ContextStats>> tables_;
};

/// exp(-total log-prob / total tokens), boundaries included.
double forward_ppl(const NGramLM& lm, const std::vector<NGramLM::Sentence>& sentences);

}  // namespace pvae::metrics
