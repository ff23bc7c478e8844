#include <algorithm>
#include <cmath>
#include <limits>

#include "pvae/errors.hpp"
#include "pvae/model/train.hpp"

namespace pvae::model {
namespace {

constexpr int kMaxPointDraws = 50;
// The loss is O(10), so difference round-off is near 1e-10 at h = 1e-4.
constexpr double kObjectiveErrorFloor = 1e-6;

double clearance(const LossTerms& terms) {
  double c = std::numeric_limits<double>::infinity();
  for (const auto& hs : terms.kink_margins)
    for (double v : hs) c = std::min(c, std::abs(v));
  return c;
}

}  // namespace

MicroGradCheck micro_objective_grad_check(std::uint64_t seed, proximity::ProximityKind kind, double h) {
  ModelConfig mc;
  mc.vocab_size = 5;
  mc.embed_dim = 4;
  mc.hidden = 4;
  mc.sem_dim = 3;
  mc.syn_dim = 2;
  mc.init_scale = 0.5;

  TrainingConfig tc;
  tc.negatives = 2;
  tc.batch_size = 4;
  tc.proximity = kind;
  tc.mmd_samples = 4;
  tc.word_dropout = 0.3;

  StepData data;
  data.sequences = {{4, 4}, {4, 1}, {1, 4, 4}, {4}, {1, 1}};
  data.batch = 4;
  data.tuples[0] = {{0, 4, {1, 2}}, {1, 3, {0, 2}}};
  data.tuples[1] = {{2, 0, {3, 1}}, {3, 1, {0, 2}}};

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  MicroGradCheck out;
  for (int draw = 0; draw < kMaxPointDraws; ++draw) {
    Model model(mc, seed);
    // Non-zero biases so every parameter has a visible gradient.
    for (auto& p : model.parameters()) {
      for (double& v : p.value.values()) v += u(rng);
    }
    const StepNoise noise = StepNoise::draw(data, mc, tc, rng);
    auto f = [&](ad::Tape& tape) {
      Graph g(tape, model, true);
      return build_loss(g, data, noise, tc, 0.3).total;
    };
    {
      ad::Tape tape;
      Graph g(tape, model, false);
      out.clearance = clearance(build_loss(g, data, noise, tc, 0.3));
    }
    if (out.clearance < kKinkClearance) {
      ++out.kink_adjacent_skipped;
      continue;
    }
    auto params = model.parameter_ptrs();
    out.result = ad::grad_check(f, params, h, ad::Stencil::FivePoint, kObjectiveErrorFloor);
    return out;
  }
  throw NumericError("micro objective: every candidate point was kink-adjacent");
}

}  // namespace pvae::model
