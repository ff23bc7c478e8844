#include "pvae/metrics/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pvae/errors.hpp"

namespace pvae::metrics {

NGramLM NGramLM::train(const std::vector<Sentence>& corpus, int order, double discount) {
  std::vector<std::pair<Sentence, std::uint64_t>> weighted;
  weighted.reserve(corpus.size());
  for (const auto& s : corpus) weighted.emplace_back(s, 1);
  return train_weighted(weighted, order, discount);
}

NGramLM NGramLM::train_weighted(const std::vector<std::pair<Sentence, std::uint64_t>>& corpus, int order,
                                double discount) {
  if (corpus.empty()) throw DataError("cannot train an n-gram model on an empty corpus");
  if (order < 1) throw ConfigError("n-gram order must be at least 1");
  if (!(discount > 0.0 && discount < 1.0)) throw ConfigError("Kneser-Ney discount must lie in (0, 1)");

  std::map<std::string, std::uint64_t> freq;
  for (const auto& [s, mult] : corpus)
    for (const auto& w : s) freq[w] += mult;

  NGramLM lm;
  lm.order_ = order;
  lm.discount_ = discount;
  for (const auto& [w, c] : freq) {
    if (c >= 2 && w != kUnk && w != kEos && w != kBos) lm.vocab_.push_back(w);
  }
  lm.vocab_.push_back(kUnk);
  lm.vocab_.push_back(kEos);
  for (std::size_t i = 0; i < lm.vocab_.size(); ++i) lm.index_[lm.vocab_[i]] = static_cast<int>(i);
  lm.bos_id_ = static_cast<int>(lm.vocab_.size());  // context-only symbol

  std::vector<std::pair<std::vector<int>, std::uint64_t>> ids;
  ids.reserve(corpus.size());
  for (const auto& [s, mult] : corpus) {
    std::vector<int> v;
    v.reserve(s.size());
    for (const auto& w : s) v.push_back(lm.id_of(w));
    ids.emplace_back(std::move(v), mult);
  }
  lm.build(ids);
  return lm;
}

NGramLM NGramLM::uniform(std::size_t vocab_size) {
  if (vocab_size == 0) throw ConfigError("uniform LM needs a non-empty vocabulary");
  NGramLM lm;
  lm.order_ = 1;
  for (std::size_t i = 0; i + 2 < vocab_size; ++i) lm.vocab_.push_back("w" + std::to_string(i));
  if (vocab_size >= 2) lm.vocab_.push_back(kUnk);
  lm.vocab_.push_back(kEos);
  for (std::size_t i = 0; i < lm.vocab_.size(); ++i) lm.index_[lm.vocab_[i]] = static_cast<int>(i);
  lm.bos_id_ = static_cast<int>(lm.vocab_.size());
  lm.tables_.resize(1);  // no statistics: every query falls through to uniform
  return lm;
}

int NGramLM::id_of(const std::string& w) const {
  if (w == kBos) return bos_id_;
  auto it = index_.find(w);
  if (it != index_.end()) return it->second;
  auto unk = index_.find(kUnk);
  return unk != index_.end() ? unk->second : 0;
}

void NGramLM::build(const std::vector<std::pair<std::vector<int>, std::uint64_t>>& sentences) {
  const int n = order_;
  const int eos = index_.at(kEos);
  tables_.assign(n, {});

  // Highest order: raw counts. Also collect the distinct n-grams for the
  // continuation counts of the orders below.
  std::set<std::vector<int>> distinct;
  for (const auto& [s, mult] : sentences) {
    std::vector<int> padded(n - 1, bos_id_);
    padded.insert(padded.end(), s.begin(), s.end());
    padded.push_back(eos);
    for (std::size_t i = n - 1; i < padded.size(); ++i) {
      std::vector<int> ctx(padded.begin() + (i - (n - 1)), padded.begin() + i);
      auto& st = tables_[n - 1][ctx];
      st.counts[padded[i]] += static_cast<double>(mult);
      st.total += static_cast<double>(mult);
      if (n > 1) {
        std::vector<int> gram(ctx);
        gram.push_back(padded[i]);
        distinct.insert(std::move(gram));
      }
    }
  }

  // Order k (k tokens incl. the predicted word) gets count N1+(. v) for each
  // k-gram v: the number of distinct one-token left extensions seen.
  for (int k = n - 1; k >= 1; --k) {
    std::set<std::vector<int>> shorter;
    for (const auto& gram : distinct) {
      std::vector<int> suffix(gram.begin() + 1, gram.end());
      std::vector<int> ctx(suffix.begin(), suffix.end() - 1);
      auto& st = tables_[k - 1][ctx];
      st.counts[suffix.back()] += 1.0;
      st.total += 1.0;
      shorter.insert(std::move(suffix));
    }
    distinct = std::move(shorter);
  }
}

double NGramLM::prob_ids(const int* context, int context_len, int word) const {
  // context_len tokens are available; use the last (level) of them at this level.
  const int level = std::min(context_len, order_ - 1);
  const double uniform = 1.0 / static_cast<double>(vocab_.size());
  double p = uniform;
  // Build up from order 1 to order level+1.
  for (int k = 0; k <= level; ++k) {
    const std::vector<int> ctx(context + context_len - k, context + context_len);
    const auto& table = tables_[k];
    auto it = table.find(ctx);
    if (it == table.end() || it->second.total <= 0.0) continue;  // unseen history: back off entirely
    const ContextStats& st = it->second;
    auto wc = st.counts.find(word);
    const double c = wc == st.counts.end() ? 0.0 : wc->second;
    const double types = static_cast<double>(st.counts.size());
    p = (std::max(c - discount_, 0.0) + discount_ * types * p) / st.total;
  }
  return p;
}

double NGramLM::prob(std::span<const std::string> context, const std::string& word) const {
  std::vector<int> ctx;
  ctx.reserve(context.size());
  for (const auto& w : context) ctx.push_back(id_of(w));
  if (word == kBos) throw ContractError("'<s>' is never predicted");
  return prob_ids(ctx.data(), static_cast<int>(ctx.size()), id_of(word));
}

std::pair<double, std::size_t> NGramLM::sentence_log_prob(const Sentence& sentence) const {
  std::vector<int> padded(std::max(order_ - 1, 0), bos_id_);
  for (const auto& w : sentence) padded.push_back(id_of(w));
  padded.push_back(index_.at(kEos));
  double lp = 0.0;
  const int start = std::max(order_ - 1, 0);
  for (std::size_t i = start; i < padded.size(); ++i) {
    lp += std::log(prob_ids(padded.data(), static_cast<int>(i), padded[i]));
  }
  return {lp, padded.size() - start};
}

double forward_ppl(const NGramLM& lm, const std::vector<NGramLM::Sentence>& sentences) {
  if (sentences.empty()) throw ContractError("forward_ppl: no sentences");
  double lp = 0.0;
  std::size_t tokens = 0;
  for (const auto& s : sentences) {
    auto [l, n] = lm.sentence_log_prob(s);
    lp += l;
    tokens += n;
  }
  return std::exp(-lp / static_cast<double>(tokens));
}

}  // namespace pvae::metrics
