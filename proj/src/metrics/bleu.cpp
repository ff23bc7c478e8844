#include "pvae/metrics/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pvae/errors.hpp"

namespace pvae::metrics {
namespace {

std::map<Tokens, std::size_t> ngram_counts(const Tokens& s, int n) {
  std::map<Tokens, std::size_t> counts;
  if (s.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[Tokens(s.begin() + i, s.begin() + i + n)];
  return counts;
}

}  // namespace

BleuStats::BleuStats(int n) : max_n(n), matched(n, 0), total(n, 0) {
  if (n < 1) throw ContractError("BLEU max_n must be at least 1");
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (other.max_n != max_n) throw ContractError("cannot pool BLEU stats of different orders");
  for (int k = 0; k < max_n; ++k) {
    matched[k] += other.matched[k];
    total[k] += other.total[k];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats bleu_stats(const Tokens& candidate, const Tokens& reference, int max_n) {
  BleuStats st(max_n);
  st.candidate_length = candidate.size();
  st.reference_length = reference.size();
  for (int n = 1; n <= max_n; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    for (const auto& [gram, count] : cand) {
      st.total[n - 1] += count;
      auto it = ref.find(gram);
      if (it != ref.end()) st.matched[n - 1] += std::min(count, it->second);
    }
  }
  return st;
}

double bleu_from_stats(const BleuStats& st) {
  if (st.candidate_length == 0) return 0.0;
  if (st.matched[0] == 0) return 0.0;
  double log_p = 0.0;
  for (int k = 0; k < st.max_n; ++k) {
    double num = static_cast<double>(st.matched[k]);
    double den = static_cast<double>(st.total[k]);
    if (k > 0 && st.matched[k] == 0) {
      num += 1.0;
      den += 1.0;
    }
    log_p += std::log(num / den);
  }
  log_p /= st.max_n;
  const double c = static_cast<double>(st.candidate_length);
  const double r = static_cast<double>(st.reference_length);
  const double log_bp = c > r ? 0.0 : 1.0 - r / c;
  return std::clamp(std::exp(log_p + log_bp), 0.0, 1.0);
}

double sentence_bleu(const Tokens& candidate, const Tokens& reference, int max_n) {
  return bleu_from_stats(bleu_stats(candidate, reference, max_n));
}

double corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references, int max_n) {
  if (candidates.size() != references.size()) {
    throw DimensionError("corpus_bleu: " + std::to_string(candidates.size()) + " candidates vs " +
                         std::to_string(references.size()) + " references");
  }
  BleuStats pooled(max_n);
  for (std::size_t i = 0; i < candidates.size(); ++i) pooled += bleu_stats(candidates[i], references[i], max_n);
  return bleu_from_stats(pooled);
}

}  // namespace pvae::metrics
