#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "fd_oracle.hpp"
#include "oracles.hpp"
#include "pvae/data/synthetic.hpp"
#include "pvae/errors.hpp"
#include "pvae/model/checkpoint.hpp"
#include "pvae/model/evaluate.hpp"
#include "pvae/model/model.hpp"
#include "pvae/model/train.hpp"
#include "pvae/proximity/proximity.hpp"

using namespace pvae;
using namespace pvae::model;
namespace fs = std::filesystem;

namespace {

ModelConfig small_config(std::size_t vocab) {
  ModelConfig mc;
  mc.vocab_size = vocab;
  mc.embed_dim = 16;
  mc.hidden = 16;
  mc.sem_dim = 8;
  mc.syn_dim = 4;
  return mc;
}

data::Dataset synthetic_dataset(std::size_t n, std::uint64_t seed = 1) {
  data::SyntheticSpec spec;
  spec.size = n;
  spec.seed = seed;
  data::Dataset ds;
  ds.examples = data::generate_synthetic(spec).examples;
  ds.vocab = data::Vocab::build(ds.token_lists());
  ds.index();
  return ds;
}

std::vector<similarity::SimilarityCriterion> ground_truth() {
  return {similarity::SimilarityCriterion::make(Criterion::Semantic, similarity::Variant::GroundTruthFactor),
          similarity::SimilarityCriterion::make(Criterion::Syntactic, similarity::Variant::GroundTruthFactor)};
}

void fill(ad::Tensor& t, double v) {
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = v;
}

ad::Var row_var(ad::Tape& t, const std::vector<double>& z) {
  ad::Tensor m = ad::Tensor::matrix(1, z.size());
  for (std::size_t i = 0; i < z.size(); ++i) m[i] = z[i];
  return t.constant(m);
}

/// Trained once and shared by the tests that need a model with structure.
struct TrainedToy {
  data::Dataset ds;
  ModelConfig mc;
  TrainingConfig tc;
  std::unique_ptr<Model> model;
  std::vector<EpochReport> epochs;

  static const TrainedToy& get() {
    static const TrainedToy toy = [] {
      TrainedToy t;
      t.ds = synthetic_dataset(1500, 3);
      t.mc = small_config(t.ds.vocab.size());
      t.mc.hidden = 32;
      t.mc.embed_dim = 32;
      t.tc.epochs = 10;
      t.tc.anneal_horizon = 400;
      t.tc.seed = 3;
      t.model = std::make_unique<Model>(t.mc, t.tc.seed);
      t.epochs = train(*t.model, t.ds, ground_truth(), t.tc);
      return t;
    }();
    return toy;
  }
};

}  // namespace

TEST(ModelConfig, Validation) {
  ModelConfig mc;
  EXPECT_THROW(mc.validate(), ConfigError);  // vocab 0
  mc.vocab_size = 10;
  EXPECT_NO_THROW(mc.validate());
  mc.syn_dim = 0;
  EXPECT_THROW(mc.validate(), ConfigError);
}

TEST(Encoder, DeterministicPosterior) {
  const Model m(small_config(12), 1);
  const std::vector<int> ids{4, 5, 6, 7};
  for (Criterion c : kCriteria) {
    const auto a = encode(m, c, ids), b = encode(m, c, ids);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stddev, b.stddev);
    EXPECT_EQ(a.dim(), m.config().subspace_dim(c));
  }
  EXPECT_THROW(encode(m, Criterion::Semantic, {}), ContractError);
}

TEST(Encoder, ZeroProjectionGivesZeroMean) {
  Model m(small_config(12), 2);
  for (Criterion c : kCriteria) {
    fill(m.param(criterion_prefix(c) + "mu.w").value, 0.0);
    fill(m.param(criterion_prefix(c) + "mu.b").value, 0.0);
    for (double v : encode(m, c, {4, 8, 9}).mean) EXPECT_EQ(v, 0.0);
  }
}

TEST(Encoder, BatchMatchesSingle) {
  const Model m(small_config(12), 3);
  const std::vector<std::vector<int>> seqs{{4}, {5, 6, 7, 8, 9}, {10, 11}};
  const auto batch = encode_batch(m, Criterion::Syntactic, seqs);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto one = encode(m, Criterion::Syntactic, seqs[i]);
    for (std::size_t d = 0; d < one.dim(); ++d) {
      EXPECT_NEAR(batch[i].mean[d], one.mean[d], 1e-12);
      EXPECT_NEAR(batch[i].stddev[d], one.stddev[d], 1e-12);
    }
  }
}

TEST(Reparameterize, ZeroSigmaReturnsMean) {
  std::mt19937_64 rng(1);
  const GaussianPosterior q{{0.5, -2.0}, {0.0, 0.0}};
  EXPECT_EQ(reparameterize(q, rng), q.mean);
}

TEST(Reparameterize, MonteCarloMeanAndDeterminism) {
  const GaussianPosterior q{{0.3, -1.2, 2.0}, {1.0, 1.0, 1.0}};
  std::mt19937_64 rng(5);
  const int n = 100000;
  std::vector<double> sum(3, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto z = reparameterize(q, rng);
    for (int d = 0; d < 3; ++d) sum[d] += z[d];
  }
  const double stderr_ = 1.0 / std::sqrt(static_cast<double>(n));
  for (int d = 0; d < 3; ++d) {
    EXPECT_LT(std::abs(sum[d] / n - q.mean[d]), 5 * stderr_);
    EXPECT_LT(std::abs(sum[d] / n - q.mean[d]), 0.01);
  }
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(reparameterize(q, a), reparameterize(q, b));
}

TEST(Decoder, OneTokenLogitsShape) {
  const Model m(small_config(12), 4);
  ad::Tape t;
  Graph g(t, m, false);
  const auto logits = teacher_forced_logits(g, row_var(t, std::vector<double>(12, 0.1)), {data::Vocab::kEos});
  ASSERT_EQ(logits.size(), 1u);
  EXPECT_EQ(logits[0].value().rows(), 1u);
  EXPECT_EQ(logits[0].value().cols(), 12u);
}

TEST(Decoder, GreedyIsDeterministic) {
  const Model m(small_config(12), 5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<LatentCode> codes(4);
  for (auto& c : codes) {
    c.sem.resize(8);
    c.syn.resize(4);
    for (double& v : c.sem) v = n(rng);
    for (double& v : c.syn) v = n(rng);
  }
  const auto a = greedy_decode(m, codes, 10), b = greedy_decode(m, codes, 10);
  EXPECT_EQ(a, b);
  for (const auto& s : a) EXPECT_LE(s.size(), 10u);
}

TEST(Decoder, BatchedNllMatchesPerSentenceLogits) {
  const Model m(small_config(12), 6);
  const std::vector<std::vector<int>> targets{{4, 5, data::Vocab::kEos}, {6, data::Vocab::kEos}};
  std::vector<std::vector<int>> inputs;
  for (const auto& s : targets) {
    std::vector<int> in{data::Vocab::kBos};
    in.insert(in.end(), s.begin(), s.end() - 1);
    inputs.push_back(in);
  }
  const std::vector<double> z0(12, 0.2), z1(12, -0.3);
  ad::Tape t;
  Graph g(t, m, false);
  ad::Tensor zt = ad::Tensor::matrix(2, 12);
  for (std::size_t i = 0; i < 12; ++i) {
    zt.at(0, i) = z0[i];
    zt.at(1, i) = z1[i];
  }
  const double batched = decoder_nll(g, t.constant(zt), inputs, targets).value()[0];
  const double single = reconstruction_loss(teacher_forced_logits(g, row_var(t, z0), targets[0]), targets[0]).value()[0] +
                        reconstruction_loss(teacher_forced_logits(g, row_var(t, z1), targets[1]), targets[1]).value()[0];
  EXPECT_NEAR(batched, single, 1e-10);
}

TEST(ReconstructionLoss, PerfectUniformAndComposed) {
  ad::Tape t;
  const std::vector<int> targets{2, 0, 3};
  std::vector<ad::Var> perfect, uniform, random;
  std::mt19937_64 rng(1);
  for (int k : targets) {
    ad::Tensor p = ad::Tensor::matrix(1, 5);
    fill(p, -50.0);
    p[k] = 50.0;
    perfect.push_back(t.constant(p));
    uniform.push_back(t.constant(ad::Tensor::matrix(1, 5)));
    random.push_back(t.constant(pvae::testing::random_matrix(1, 5, rng, -2, 2)));
  }
  EXPECT_NEAR(reconstruction_loss(perfect, targets).value()[0], 0.0, 1e-12);
  EXPECT_NEAR(reconstruction_loss(uniform, targets).value()[0], 3 * std::log(5.0), 1e-12);
  double composed = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i)
    composed += ad::softmax_cross_entropy(random[i], targets[i]).value()[0];
  EXPECT_NEAR(reconstruction_loss(random, targets).value()[0], composed, 1e-12);
  EXPECT_THROW(reconstruction_loss(random, {1, 2}), ContractError);
}

TEST(KlLoss, KnownValuesAndMonteCarlo) {
  EXPECT_DOUBLE_EQ(kl_loss({GaussianPosterior{{0.0, 0.0}, {1.0, 1.0}}}), 0.0);
  EXPECT_DOUBLE_EQ(kl_loss({GaussianPosterior{{1.0}, {1.0}}}), 0.5);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    const auto q = pvae::testing::random_posterior(6, rng, 1.5, 0.3, 1.5);
    GaussianPosterior prior{std::vector<double>(6, 0.0), std::vector<double>(6, 1.0)};
    const auto mc = pvae::testing::monte_carlo_kl(q, prior, 200000, rng);
    const double closed = kl_loss(std::vector<GaussianPosterior>{q});
    EXPECT_LT(std::abs(closed - mc.mean), 0.01 * closed);
    EXPECT_NEAR(closed, proximity::gaussian_kl(q, prior), 1e-12);
  }
}

TEST(KlWeight, Schedule) {
  EXPECT_NEAR(kl_weight(0, 0.3), 0.3 / (1.0 + std::exp(2500.0 / 300.0)), 1e-15);
  EXPECT_NEAR(kl_weight(0, 0.3), 7.2e-5, 1e-6);
  EXPECT_EQ(kl_weight(2500, 0.3), 0.15);
  EXPECT_GE(kl_weight(5000, 0.3), 0.2999);
  EXPECT_LE(kl_weight(5000, 0.3), 0.3);
  double prev = -1.0;
  for (std::uint64_t s = 0; s <= 6000; s += 100) {
    EXPECT_GT(kl_weight(s, 0.3), prev);
    prev = kl_weight(s, 0.3);
  }
  EXPECT_EQ(kl_weight(750, 1.0, 1500), 0.5);
}

TEST(WordDropout, RateZeroAndSpecials) {
  std::mt19937_64 rng(1);
  const std::vector<int> ids{data::Vocab::kBos, 4, 5, 6, data::Vocab::kEos, data::Vocab::kPad};
  EXPECT_EQ(word_dropout(ids, 0.0, rng), ids);
  for (int i = 0; i < 100; ++i) {
    const auto out = word_dropout(ids, 0.9, rng);
    EXPECT_EQ(out[0], data::Vocab::kBos);
    EXPECT_EQ(out[4], data::Vocab::kEos);
    EXPECT_EQ(out[5], data::Vocab::kPad);
  }
}

TEST(WordDropout, HighRateFraction) {
  std::mt19937_64 rng(2);
  std::vector<int> ids(10000);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = 4 + static_cast<int>(i % 50);
  const auto out = word_dropout(ids, 0.99, rng);
  const double frac = std::count(out.begin(), out.end(), data::Vocab::kUnk) / 10000.0;
  EXPECT_GE(frac, 0.98);
  EXPECT_LE(frac, 1.0);
}

TEST(Loss, ZeroLambdasGiveVaeObjective) {
  const auto ds = synthetic_dataset(64);
  const Model m(small_config(ds.vocab.size()), 7);
  TrainingConfig tc;
  tc.lambda_sem = tc.lambda_syn = 0.0;
  const auto batches = similarity::make_batches(ds.examples, 16, 1, 0, ground_truth(), tc.negatives);
  const auto data = StepData::from_batch(ds, batches[0]);
  std::mt19937_64 rng(1);
  const auto noise = StepNoise::draw(data, m.config(), tc, rng);
  ad::Tape t;
  Graph g(t, m, false);
  const auto terms = build_loss(g, data, noise, tc, 0.25);
  EXPECT_EQ(terms.total.value()[0], terms.rec.value()[0] + 0.25 * terms.kl.value()[0]);
  EXPECT_NEAR(terms.kl.value()[0], terms.kl_sub[0].value()[0] + terms.kl_sub[1].value()[0], 1e-12);
}

TEST(Loss, ZeroKlWeightLeavesReconstructionAndProximity) {
  const auto ds = synthetic_dataset(64);
  const Model m(small_config(ds.vocab.size()), 8);
  TrainingConfig tc;
  const auto batches = similarity::make_batches(ds.examples, 16, 1, 0, ground_truth(), tc.negatives);
  const auto data = StepData::from_batch(ds, batches[0]);
  ASSERT_FALSE(data.tuples[0].empty());
  std::mt19937_64 rng(1);
  const auto noise = StepNoise::draw(data, m.config(), tc, rng);
  ad::Tape t;
  Graph g(t, m, false);
  const auto terms = build_loss(g, data, noise, tc, kl_weight(0, tc.kl_cap));
  const double expected = terms.rec.value()[0] + terms.prox[0].value()[0] + terms.prox[1].value()[0];
  EXPECT_NEAR(terms.total.value()[0], expected, 1e-4 * terms.kl.value()[0] + 1e-12);
}

TEST(Loss, MicroObjectiveGradientCheck) {
  const auto r = micro_objective_grad_check(1);
  EXPECT_LT(r.result.max_rel_error, 1e-4) << r.result.worst_parameter;
  EXPECT_GE(r.clearance, kKinkClearance);
}

TEST(TrainStep, NonFiniteLossLeavesParametersUntouched) {
  const auto ds = synthetic_dataset(32);
  Model m(small_config(ds.vocab.size()), 9);
  m.param("dec.out.b").value[0] = std::nan("");
  const auto before = m.param("dec.lstm.w").value;
  TrainingConfig tc;
  const auto batches = similarity::make_batches(ds.examples, 16, 1, 0, ground_truth(), tc.negatives);
  ad::AdamState adam;
  std::mt19937_64 rng(1);
  const auto rep = train_step(m, adam, StepData::from_batch(ds, batches[0]), tc, 0, rng);
  EXPECT_FALSE(rep.finite);
  EXPECT_FALSE(rep.diagnostics.empty());
  EXPECT_EQ(adam.step, 0u);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(m.param("dec.lstm.w").value[i], before[i]);
}

TEST(Training, OverfitsTenSentences) {
  auto ds = synthetic_dataset(10, 4);
  ModelConfig mc = small_config(ds.vocab.size());
  mc.hidden = 32;
  mc.embed_dim = 32;
  Model m(mc, 4);
  TrainingConfig tc;
  tc.lambda_sem = tc.lambda_syn = 0.0;
  tc.kl_cap = 0.0;
  tc.word_dropout = 0.0;
  tc.learning_rate = 1e-2;
  tc.batch_size = 10;
  ad::AdamState adam;
  std::mt19937_64 rng(4);
  StepData data;
  for (const auto& ex : ds.examples) data.sequences.push_back(ex.ids);
  data.batch = data.sequences.size();
  for (std::uint64_t step = 0; step < 200; ++step) ASSERT_TRUE(train_step(m, adam, data, tc, step, rng).finite);

  std::size_t correct = 0, total = 0;
  for (const auto& ex : ds.examples) {
    LatentCode code{encode(m, Criterion::Semantic, ex.ids).mean, encode(m, Criterion::Syntactic, ex.ids).mean};
    std::vector<int> targets = ex.ids;
    targets.push_back(data::Vocab::kEos);
    ad::Tape t;
    Graph g(t, m, false);
    const auto logits = teacher_forced_logits(g, row_var(t, code.concatenated()), targets);
    for (std::size_t s = 0; s < targets.size(); ++s) {
      const auto& v = logits[s].value();
      std::size_t best = 0;
      for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] > v[best]) best = k;
      correct += static_cast<int>(best) == targets[s];
      ++total;
    }
  }
  EXPECT_GT(static_cast<double>(correct) / total, 0.95);
}

TEST(Training, LossTrendsDownwardOverTenEpochs) {
  const auto& toy = TrainedToy::get();
  ASSERT_EQ(toy.epochs.size(), 10u);
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  int decreasing = 0;
  for (std::size_t e = 0; e + 1 < toy.epochs.size(); ++e)
    decreasing += median(toy.epochs[e + 1].step_totals) < median(toy.epochs[e].step_totals);
  EXPECT_GE(decreasing, 7);
}

namespace {

/// Fraction of 200 pairs sharing exactly one factor whose distance in that
/// factor's subspace is below the distance in the other subspace.
double factor_ordering_rate(const Model& m, const std::vector<data::SentenceExample>& ex, bool share_content) {
  std::size_t wins = 0, pairs = 0;
  for (std::size_t i = 0; i < ex.size() && pairs < 200; ++i) {
    for (std::size_t j = i + 1; j < ex.size() && pairs < 200; ++j) {
      const bool same_content = ex[i].content_id == ex[j].content_id;
      const bool same_template = ex[i].template_id == ex[j].template_id;
      if (same_content == same_template || same_content != share_content) continue;
      const double dsem = proximity::cosine_distance(encode(m, Criterion::Semantic, ex[i].ids).mean,
                                                     encode(m, Criterion::Semantic, ex[j].ids).mean);
      const double dsyn = proximity::cosine_distance(encode(m, Criterion::Syntactic, ex[i].ids).mean,
                                                     encode(m, Criterion::Syntactic, ex[j].ids).mean);
      wins += share_content ? dsem < dsyn : dsyn < dsem;
      ++pairs;
    }
  }
  return static_cast<double>(wins) / static_cast<double>(pairs);
}

}  // namespace

TEST(Training, SubspacesSeparateContentFromTemplate) {
  const auto& toy = TrainedToy::get();
  const Model untrained(toy.mc, toy.tc.seed);
  for (bool share_content : {true, false}) {
    const double trained = factor_ordering_rate(*toy.model, toy.ds.examples, share_content);
    const double before = factor_ordering_rate(untrained, toy.ds.examples, share_content);
    EXPECT_GT(trained, 0.7) << "share_content=" << share_content;
    EXPECT_GT(trained, before) << "share_content=" << share_content;
  }
}

TEST(Checkpoint, RoundTripPreservesEverything) {
  const Model m(small_config(15), 10);
  const fs::path p = fs::temp_directory_path() / "pvae_ckpt_test.bin";
  save_checkpoint(p.string(), m, {{"vocab", "a b c"}, {"run.seed", "10"}});
  const Checkpoint c = load_checkpoint(p.string());
  EXPECT_EQ(c.meta.at("vocab"), "a b c");
  EXPECT_EQ(c.meta.at("run.seed"), "10");
  EXPECT_EQ(c.model.config().hidden, m.config().hidden);
  ASSERT_EQ(c.model.parameters().size(), m.parameters().size());
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    EXPECT_EQ(c.model.parameters()[i].name, m.parameters()[i].name);
    const auto& a = c.model.parameters()[i].value;
    const auto& b = m.parameters()[i].value;
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
  }
  // Saving the loaded model again reproduces the file byte for byte.
  const fs::path q = fs::temp_directory_path() / "pvae_ckpt_test2.bin";
  save_checkpoint(q.string(), c.model, c.meta);
  std::ifstream fa(p, std::ios::binary), fb(q, std::ios::binary);
  EXPECT_TRUE(std::equal(std::istreambuf_iterator<char>(fa), {}, std::istreambuf_iterator<char>(fb), {}));
}

TEST(Checkpoint, MalformedAndMissingFiles) {
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.bin"), IoError);
  const fs::path p = fs::temp_directory_path() / "pvae_ckpt_bad.bin";
  std::ofstream(p, std::ios::binary) << "PVAE2 junk";
  EXPECT_THROW(load_checkpoint(p.string()), DataError);
  const Model m(small_config(15), 11);
  const fs::path good = fs::temp_directory_path() / "pvae_ckpt_trunc.bin";
  save_checkpoint(good.string(), m, {});
  const auto size = fs::file_size(good);
  fs::resize_file(good, size / 2);
  EXPECT_THROW(load_checkpoint(good.string()), DataError);
}

TEST(Evaluate, TransferPairsDifferInBothFactors) {
  const auto ds = synthetic_dataset(200);
  const auto pairs = transfer_pairs(ds.examples, 50, 1);
  ASSERT_EQ(pairs.size(), 50u);
  for (auto [a, b] : pairs) {
    EXPECT_NE(ds.examples[a].content_id, ds.examples[b].content_id);
    EXPECT_NE(ds.examples[a].template_id, ds.examples[b].template_id);
  }
  EXPECT_EQ(pairs, transfer_pairs(ds.examples, 50, 1));
}

TEST(Evaluate, IdenticalSourcesGiveZeroDeltas) {
  const auto& toy = TrainedToy::get();
  std::vector<std::pair<std::size_t, std::size_t>> same;
  for (std::size_t i = 0; i < 50; ++i) same.emplace_back(i, i);
  const auto out = transfer_eval(*toy.model, toy.ds, same, 1);
  EXPECT_DOUBLE_EQ(out.report.delta_bleu, 0.0);
  EXPECT_DOUBLE_EQ(out.report.delta_ted, 0.0);
  EXPECT_EQ(out.report.pairs + out.report.excluded, 50u);
}

TEST(Evaluate, CorrelationOfCopiedSubspaceIsOne) {
  ModelConfig mc = small_config(12);
  mc.sem_dim = 8;
  mc.syn_dim = 8;
  Model m(mc, 12);
  // Give the syntactic encoder the semantic encoder's weights.
  for (const char* part : {"fwd.w", "fwd.b", "bwd.w", "bwd.b", "mu.w", "mu.b", "logstd.w", "logstd.b"}) {
    m.param(std::string("enc.syn.") + part).value = m.param(std::string("enc.sem.") + part).value;
  }
  std::mt19937_64 rng(1);
  std::vector<std::vector<int>> seqs;
  for (int i = 0; i < 50; ++i) {
    std::vector<int> s(1 + rng() % 6);
    for (int& v : s) v = 4 + static_cast<int>(rng() % 8);
    seqs.push_back(s);
  }
  const auto s = subspace_correlation(m, seqs);
  EXPECT_NEAR(s.max_abs, 1.0, 1e-9);
  EXPECT_EQ(s.pairs, 64u);
}
