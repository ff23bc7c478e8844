#include "pvae/similarity/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "pvae/data/tokenize.hpp"
#include "pvae/errors.hpp"
#include "pvae/metrics/bleu.hpp"
#include "pvae/metrics/ted.hpp"

namespace pvae::similarity {
namespace {

std::string describe(const data::SentenceExample& ex) {
  std::string t = ex.text.size() > 60 ? ex.text.substr(0, 57) + "..." : ex.text;
  return "'" + t + "'";
}

[[noreturn]] void missing(const data::SentenceExample& ex, const char* field, const SimilarityCriterion& c) {
  throw DataError("example " + describe(ex) + " has no " + field + ", required by the " + to_string(c.variant) +
                  " " + to_string(c.name) + " criterion");
}

const metrics::ParseTree& skeleton_of(const data::SentenceExample& ex, const SimilarityCriterion& c) {
  if (!ex.skeleton) missing(ex, "parse", c);
  return *ex.skeleton;
}

int factor_of(const data::SentenceExample& ex, const SimilarityCriterion& c) {
  const auto& f = c.name == Criterion::Semantic ? ex.content_id : ex.template_id;
  if (!f) missing(ex, c.name == Criterion::Semantic ? "content id" : "template id", c);
  return *f;
}

/// A key such that equal keys imply sim_label == 1; empty when there is none.
std::optional<std::string> bucket_key(const data::SentenceExample& ex, const SimilarityCriterion& c) {
  switch (c.variant) {
    case Variant::GroundTruthFactor: return std::to_string(factor_of(ex, c));
    case Variant::Length: return std::to_string(ex.tokens.size());
    case Variant::TedThreshold: return metrics::serialize(skeleton_of(ex, c));
    case Variant::WordOverlap: return data::join(ex.tokens);
    case Variant::Entailment:
      if (ex.pair_id && ex.label == data::EntailmentLabel::Entailment) return std::to_string(*ex.pair_id);
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(Criterion c) { return c == Criterion::Semantic ? "sem" : "syn"; }

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Entailment: return "entailment";
    case Variant::WordOverlap: return "wo";
    case Variant::TedThreshold: return "ted";
    case Variant::Length: return "len";
    case Variant::GroundTruthFactor: return "gt";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "entailment") return Variant::Entailment;
  if (name == "wo" || name == "word_overlap") return Variant::WordOverlap;
  if (name == "ted" || name == "ted_threshold") return Variant::TedThreshold;
  if (name == "len" || name == "length") return Variant::Length;
  if (name == "gt" || name == "ground_truth_factor") return Variant::GroundTruthFactor;
  throw ConfigError("unknown similarity variant '" + name + "'");
}

SimilarityCriterion SimilarityCriterion::make(Criterion name, Variant variant) {
  SimilarityCriterion c{name, variant, 0.0};
  switch (variant) {
    case Variant::WordOverlap: c.threshold = 0.3; break;
    case Variant::TedThreshold: c.threshold = 3.0; break;
    case Variant::Length: c.threshold = 1.0; break;
    default: break;
  }
  return c;
}

void SimilarityCriterion::validate() const {
  const bool needs = variant == Variant::WordOverlap || variant == Variant::TedThreshold || variant == Variant::Length;
  if (needs && !(threshold > 0.0 && std::isfinite(threshold))) {
    throw ConfigError("threshold for " + to_string(variant) + " must be positive");
  }
}

bool sim_label(const data::SentenceExample& a, const data::SentenceExample& b, const SimilarityCriterion& c) {
  switch (c.variant) {
    case Variant::Entailment:
      if (a.tokens == b.tokens) return true;
      if (!a.pair_id) missing(a, "pair id", c);
      if (!b.pair_id) missing(b, "pair id", c);
      return *a.pair_id == *b.pair_id && a.label == data::EntailmentLabel::Entailment;
    case Variant::WordOverlap: {
      // Mean of both directions keeps the label symmetric.
      const double s = 0.5 * (metrics::sentence_bleu(a.tokens, b.tokens) + metrics::sentence_bleu(b.tokens, a.tokens));
      return s >= c.threshold;
    }
    case Variant::TedThreshold:
      return metrics::tree_edit_distance(skeleton_of(a, c), skeleton_of(b, c)) <= c.threshold;
    case Variant::Length: {
      const double diff = std::abs(static_cast<double>(a.tokens.size()) - static_cast<double>(b.tokens.size()));
      return diff <= c.threshold;
    }
    case Variant::GroundTruthFactor: return factor_of(a, c) == factor_of(b, c);
  }
  return false;
}

FallbackIndex FallbackIndex::build(const std::vector<data::SentenceExample>& examples, const SimilarityCriterion& c,
                                   std::uint64_t seed, std::size_t probes) {
  FallbackIndex idx;
  const std::size_t n = examples.size();
  idx.positive_.assign(n, std::nullopt);

  std::map<std::string, std::vector<std::size_t>> buckets;
  std::vector<std::optional<std::string>> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = bucket_key(examples[i], c);
    if (keys[i]) buckets[*keys[i]].push_back(i);
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    if (keys[i]) {
      const auto& members = buckets[*keys[i]];
      if (members.size() > 1) {
        std::uniform_int_distribution<std::size_t> pick(0, members.size() - 2);
        std::size_t j = pick(rng);
        if (members[j] == i) j = members.size() - 1;  // skip self
        idx.positive_[i] = members[j];
        continue;
      }
    }
    if (n < 2) continue;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t p = 0; p < probes; ++p) {
      const std::size_t j = pick(rng);
      if (j != i && sim_label(examples[i], examples[j], c)) {
        idx.positive_[i] = j;
        break;
      }
    }
  }
  return idx;
}

std::optional<std::size_t> FallbackIndex::positive(std::size_t i) const {
  if (i >= positive_.size()) return std::nullopt;
  return positive_[i];
}

std::size_t FallbackIndex::coverage() const {
  return static_cast<std::size_t>(
      std::count_if(positive_.begin(), positive_.end(), [](const auto& p) { return p.has_value(); }));
}

MiningResult mine_pairs(const std::vector<data::SentenceExample>& examples, const std::vector<std::size_t>& batch,
                        const SimilarityCriterion& c, std::size_t m, std::mt19937_64& rng,
                        const FallbackIndex* fallback) {
  if (m < 1) throw ConfigError("negatives count m must be at least 1");
  if (batch.size() < m + 2) {
    throw ConfigError("batch of " + std::to_string(batch.size()) + " is too small to mine 1 positive and " +
                      std::to_string(m) + " negatives");
  }
  for (std::size_t i : batch) {
    if (i >= examples.size()) throw IndexError("batch index " + std::to_string(i) + " out of range");
  }

  const std::size_t b = batch.size();
  std::vector<char> sim(b * b, 0);
  for (std::size_t i = 0; i < b; ++i) {
    sim[i * b + i] = 1;
    for (std::size_t j = i + 1; j < b; ++j) {
      sim[i * b + j] = sim[j * b + i] = sim_label(examples[batch[i]], examples[batch[j]], c) ? 1 : 0;
    }
  }

  MiningResult out;
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < b; ++i) {
    pos.clear();
    neg.clear();
    for (std::size_t j = 0; j < b; ++j) {
      if (j == i || batch[j] == batch[i]) continue;
      (sim[i * b + j] ? pos : neg).push_back(batch[j]);
    }
    std::optional<std::size_t> positive;
    if (!pos.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, pos.size() - 1);
      positive = pos[pick(rng)];
    } else if (fallback) {
      positive = fallback->positive(batch[i]);
    }
    if (!positive || neg.size() < m) {
      ++out.skipped;
      continue;
    }
    // Partial Fisher-Yates: first m entries become a uniform sample without replacement.
    for (std::size_t k = 0; k < m; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, neg.size() - 1);
      std::swap(neg[k], neg[pick(rng)]);
    }
    out.pairs.push_back({batch[i], *positive, std::vector<std::size_t>(neg.begin(), neg.begin() + m), c.name});
  }
  return out;
}

std::vector<std::vector<std::size_t>> epoch_partition(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                      std::size_t epoch) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; s += batch_size) {
    out.emplace_back(order.begin() + s, order.begin() + std::min(n, s + batch_size));
  }
  return out;
}

std::vector<Batch> make_batches(const std::vector<data::SentenceExample>& examples, std::size_t batch_size,
                                std::uint64_t seed, std::size_t epoch, const std::vector<SimilarityCriterion>& criteria,
                                std::size_t m, const std::vector<const FallbackIndex*>& fallbacks) {
  if (m < 1) throw ConfigError("negatives count m must be at least 1");
  if (batch_size < m + 2) {
    throw ConfigError("batch size " + std::to_string(batch_size) + " is below m + 2 = " + std::to_string(m + 2));
  }
  if (!fallbacks.empty() && fallbacks.size() != criteria.size()) {
    throw ContractError("one fallback index per criterion expected");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x313eu};
  std::mt19937_64 rng(seq);
  std::vector<Batch> out;
  for (auto& idx : epoch_partition(examples.size(), batch_size, seed, epoch)) {
    Batch batch;
    batch.indices = std::move(idx);
    if (batch.indices.size() >= m + 2) {
      for (std::size_t k = 0; k < criteria.size(); ++k) {
        batch.mined.push_back(mine_pairs(examples, batch.indices, criteria[k], m, rng,
                                         fallbacks.empty() ? nullptr : fallbacks[k]));
      }
    } else {
      batch.mined.resize(criteria.size());
    }
    out.push_back(std::move(batch));
  }
  return out;
}

}  // namespace pvae::similarity
