#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "pvae/data/synthetic.hpp"
#include "pvae/errors.hpp"
#include "pvae/similarity/similarity.hpp"

using namespace pvae;
using namespace pvae::similarity;
using data::SentenceExample;

namespace {

SentenceExample ex(const std::string& text, std::optional<std::string> parse = std::nullopt) {
  return SentenceExample::make(text, parse);
}

std::vector<SimilarityCriterion> all_criteria() {
  std::vector<SimilarityCriterion> out;
  for (auto name : {Criterion::Semantic, Criterion::Syntactic})
    for (auto v : {Variant::Entailment, Variant::WordOverlap, Variant::TedThreshold, Variant::Length,
                   Variant::GroundTruthFactor})
      out.push_back(SimilarityCriterion::make(name, v));
  return out;
}

std::vector<SentenceExample> synthetic(std::size_t n, std::uint64_t seed = 1) {
  data::SyntheticSpec spec;
  spec.size = n;
  spec.seed = seed;
  auto examples = data::generate_synthetic(spec).examples;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    examples[i].pair_id = i / 2;
    examples[i].label = (i / 2) % 3 == 0 ? data::EntailmentLabel::Entailment : data::EntailmentLabel::Neutral;
  }
  return examples;
}

void expect_valid(const std::vector<SentenceExample>& examples, const MiningResult& r, const SimilarityCriterion& c,
                  std::size_t m) {
  for (const auto& p : r.pairs) {
    EXPECT_EQ(p.criterion, c.name);
    EXPECT_TRUE(sim_label(examples[p.anchor], examples[p.positive], c));
    EXPECT_NE(p.anchor, p.positive);
    ASSERT_EQ(p.negatives.size(), m);
    EXPECT_EQ(std::set<std::size_t>(p.negatives.begin(), p.negatives.end()).size(), m);
    for (std::size_t n : p.negatives) {
      EXPECT_NE(n, p.anchor);
      EXPECT_NE(n, p.positive);
      EXPECT_FALSE(sim_label(examples[p.anchor], examples[n], c));
    }
  }
}

}  // namespace

TEST(SimLabel, ReflexiveForEveryVariant) {
  auto examples = synthetic(50);
  for (const auto& c : all_criteria())
    for (const auto& e : examples) EXPECT_TRUE(sim_label(e, e, c)) << to_string(c.variant);
}

TEST(SimLabel, SymmetricForEveryVariant) {
  auto examples = synthetic(60);
  for (const auto& c : all_criteria())
    for (const auto& a : examples)
      for (const auto& b : examples) EXPECT_EQ(sim_label(a, b, c), sim_label(b, a, c)) << to_string(c.variant);
}

TEST(SimLabel, LengthTolerance) {
  const auto c = SimilarityCriterion::make(Criterion::Syntactic, Variant::Length);
  EXPECT_FALSE(sim_label(ex("a b c d e"), ex("a b c d e f g h i"), c));
  EXPECT_TRUE(sim_label(ex("a b c d e"), ex("v w x y z q"), c));
}

TEST(SimLabel, WordOverlapSharingAllFourGrams) {
  // Candidate "a b c d e" within reference "a b c d e f": every n-gram of the
  // shorter side matches, so precision is 1 and BLEU = exp(1 - 6/5) = 0.8187.
  // The reverse direction has precisions 5/6, 4/5, 3/4, 2/3 and scores 0.7598.
  const auto c = SimilarityCriterion::make(Criterion::Semantic, Variant::WordOverlap);
  EXPECT_TRUE(sim_label(ex("a b c d e"), ex("a b c d e f"), c));
  EXPECT_FALSE(sim_label(ex("a b c d"), ex("w x y z"), c));
  auto strict = c;
  strict.threshold = 0.8;
  EXPECT_FALSE(sim_label(ex("a b c d e"), ex("a b c d e f"), strict));
  strict.threshold = 0.78;
  EXPECT_TRUE(sim_label(ex("a b c d e"), ex("a b c d e f"), strict));
}

TEST(SimLabel, TedThresholdUsesSkeletons) {
  const auto c = SimilarityCriterion::make(Criterion::Syntactic, Variant::TedThreshold);
  const auto a = ex("a man works", "(S (NP (DT a) (NN man)) (VP (VBZ works)))");
  const auto b = ex("the dog runs", "(S (NP (DT the) (NN dog)) (VP (VBZ runs)))");
  const auto far = ex("x y z w v", "(A (B (C x) (D y)) (E (F z) (G w) (H v)))");
  EXPECT_TRUE(sim_label(a, b, c));
  EXPECT_FALSE(sim_label(a, far, c));
  EXPECT_THROW(sim_label(a, ex("no parse"), c), DataError);
}

TEST(SimLabel, EntailmentOnlyWithinEntailedPairs) {
  const auto c = SimilarityCriterion::make(Criterion::Semantic, Variant::Entailment);
  auto a = ex("a man works"), b = ex("a person works"), d = ex("nobody works");
  a.pair_id = b.pair_id = 0;
  a.label = b.label = data::EntailmentLabel::Entailment;
  d.pair_id = 0;
  d.label = data::EntailmentLabel::Contradiction;
  auto e = ex("a cat sleeps");
  e.pair_id = 1;
  e.label = data::EntailmentLabel::Entailment;
  EXPECT_TRUE(sim_label(a, b, c));
  EXPECT_FALSE(sim_label(a, e, c));
  auto n1 = ex("x y"), n2 = ex("y z");
  n1.pair_id = n2.pair_id = 2;
  n1.label = n2.label = data::EntailmentLabel::Neutral;
  EXPECT_FALSE(sim_label(n1, n2, c));
  EXPECT_THROW(sim_label(ex("q"), ex("r"), c), DataError);
}

TEST(SimLabel, MissingFactorNamesExample) {
  const auto c = SimilarityCriterion::make(Criterion::Semantic, Variant::GroundTruthFactor);
  try {
    sim_label(ex("an unlabeled line"), ex("another"), c);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("an unlabeled line"), std::string::npos);
  }
}

TEST(SimilarityCriterion, VariantNamesAndValidation) {
  EXPECT_EQ(parse_variant("wo"), Variant::WordOverlap);
  EXPECT_EQ(parse_variant("ground_truth_factor"), Variant::GroundTruthFactor);
  EXPECT_THROW(parse_variant("semantic"), ConfigError);
  auto c = SimilarityCriterion::make(Criterion::Syntactic, Variant::TedThreshold);
  EXPECT_EQ(c.threshold, 3.0);
  c.threshold = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(MinePairs, AllDissimilarBatchSkipsEveryAnchor) {
  std::vector<SentenceExample> examples;
  for (int i = 0; i < 8; ++i) {
    examples.push_back(ex("s" + std::to_string(i)));
    examples.back().content_id = i;
  }
  const auto c = SimilarityCriterion::make(Criterion::Semantic, Variant::GroundTruthFactor);
  std::vector<std::size_t> batch(8);
  for (std::size_t i = 0; i < 8; ++i) batch[i] = i;
  std::mt19937_64 rng(1);
  const auto r = mine_pairs(examples, batch, c, 2, rng);
  EXPECT_TRUE(r.pairs.empty());
  EXPECT_EQ(r.skipped, 8u);
}

TEST(MinePairs, IdenticalBatchHasNoNegatives) {
  std::vector<SentenceExample> examples(6, ex("same words"));
  for (auto& e : examples) e.content_id = 0;
  const auto c = SimilarityCriterion::make(Criterion::Semantic, Variant::GroundTruthFactor);
  std::vector<std::size_t> batch{0, 1, 2, 3, 4, 5};
  std::mt19937_64 rng(1);
  const auto r = mine_pairs(examples, batch, c, 2, rng);
  EXPECT_TRUE(r.pairs.empty());
  EXPECT_EQ(r.skipped, 6u);
}

TEST(MinePairs, TooSmallBatchIsConfigError) {
  auto examples = synthetic(10);
  const auto c = SimilarityCriterion::make(Criterion::Semantic, Variant::GroundTruthFactor);
  std::mt19937_64 rng(1);
  EXPECT_THROW(mine_pairs(examples, {0, 1, 2}, c, 2, rng), ConfigError);
}

TEST(MinePairs, FourClassesOfEightRevalidate) {
  std::vector<SentenceExample> examples;
  for (int cls = 0; cls < 4; ++cls) {
    for (int k = 0; k < 8; ++k) {
      examples.push_back(ex("c" + std::to_string(cls) + " k" + std::to_string(k)));
      examples.back().content_id = cls;
      examples.back().template_id = k % 3;
    }
  }
  std::vector<std::size_t> batch(examples.size());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
  std::mt19937_64 rng(2);
  const auto c = SimilarityCriterion::make(Criterion::Semantic, Variant::GroundTruthFactor);
  const auto r = mine_pairs(examples, batch, c, 5, rng);
  EXPECT_EQ(r.pairs.size(), 32u);
  EXPECT_EQ(r.skipped, 0u);
  expect_valid(examples, r, c, 5);
}

TEST(MinePairs, EveryVariantRevalidatesOnSyntheticBatches) {
  auto examples = synthetic(400, 5);
  for (const auto& c : all_criteria()) {
    const auto fallback = FallbackIndex::build(examples, c, 3);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      std::mt19937_64 rng(seed);
      std::vector<std::size_t> batch;
      for (std::size_t i = seed * 32; i < seed * 32 + 32; ++i) batch.push_back(i);
      const auto r = mine_pairs(examples, batch, c, 4, rng, &fallback);
      EXPECT_EQ(r.pairs.size() + r.skipped, batch.size());
      expect_valid(examples, r, c, 4);
    }
  }
}

TEST(MinePairs, FallbackSuppliesOutOfBatchPositive) {
  std::vector<SentenceExample> examples;
  for (int i = 0; i < 12; ++i) {
    examples.push_back(ex("s" + std::to_string(i)));
    examples.back().content_id = i % 6;  // i and i + 6 share content
  }
  const auto c = SimilarityCriterion::make(Criterion::Semantic, Variant::GroundTruthFactor);
  const auto fallback = FallbackIndex::build(examples, c, 1);
  EXPECT_EQ(fallback.coverage(), 12u);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(*fallback.positive(i), (i + 6) % 12);
  std::mt19937_64 rng(1);
  const auto r = mine_pairs(examples, {0, 1, 2, 3, 4, 5}, c, 3, rng, &fallback);
  EXPECT_EQ(r.pairs.size(), 6u);
  for (const auto& p : r.pairs) EXPECT_EQ(p.positive, p.anchor + 6);
  expect_valid(examples, r, c, 3);
}

TEST(MinePairs, DeterministicForSeed) {
  auto examples = synthetic(64);
  const auto c = SimilarityCriterion::make(Criterion::Syntactic, Variant::GroundTruthFactor);
  std::vector<std::size_t> batch(64);
  for (std::size_t i = 0; i < 64; ++i) batch[i] = i;
  std::mt19937_64 r1(9), r2(9);
  const auto a = mine_pairs(examples, batch, c, 3, r1), b = mine_pairs(examples, batch, c, 3, r2);
  ASSERT_EQ(a.pairs.size(), b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    EXPECT_EQ(a.pairs[i].positive, b.pairs[i].positive);
    EXPECT_EQ(a.pairs[i].negatives, b.pairs[i].negatives);
  }
}

TEST(MakeBatches, AttachesTuplesPerCriterion) {
  auto examples = synthetic(100);
  const std::vector<SimilarityCriterion> crit{
      SimilarityCriterion::make(Criterion::Semantic, Variant::GroundTruthFactor),
      SimilarityCriterion::make(Criterion::Syntactic, Variant::GroundTruthFactor)};
  const auto batches = make_batches(examples, 32, 4, 0, crit, 3);
  ASSERT_EQ(batches.size(), 4u);
  for (const auto& b : batches) {
    ASSERT_EQ(b.mined.size(), 2u);
    if (b.indices.size() < 5) {
      EXPECT_TRUE(b.mined[0].pairs.empty());
      continue;
    }
    for (std::size_t k = 0; k < 2; ++k) expect_valid(examples, b.mined[k], crit[k], 3);
  }
  EXPECT_THROW(make_batches(examples, 4, 4, 0, crit, 3), ConfigError);
}
