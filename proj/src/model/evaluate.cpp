#include "pvae/model/evaluate.hpp"

#include <set>

#include "pvae/data/synthetic.hpp"
#include "pvae/errors.hpp"

namespace pvae::model {

std::optional<metrics::ParseTree> template_parser(const metrics::Tokens& tokens) {
  const auto t = data::match_template(tokens, 2);
  if (!t) return std::nullopt;
  return metrics::strip_terminals(metrics::parse_bracketed(data::synthetic_templates()[*t].bracketed));
}

std::vector<std::pair<std::size_t, std::size_t>> transfer_pairs(const std::vector<data::SentenceExample>& examples,
                                                                std::size_t count, std::uint64_t seed) {
  if (examples.size() < 2) throw DataError("transfer needs at least two sentences");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, examples.size() - 1);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t max_attempts = 1000 * count + 1000;
  for (std::size_t attempt = 0; out.size() < count && attempt < max_attempts; ++attempt) {
    const std::size_t a = pick(rng), b = pick(rng);
    if (a == b || examples[a].tokens == examples[b].tokens) continue;
    const auto& x = examples[a];
    const auto& y = examples[b];
    if (x.content_id && y.content_id && *x.content_id == *y.content_id) continue;
    if (x.template_id && y.template_id && *x.template_id == *y.template_id) continue;
    out.emplace_back(a, b);
  }
  if (out.size() < count) throw DataError("could not draw enough transfer pairs with distinct sources");
  return out;
}

TransferOutcome transfer_eval(const Model& model, const data::Dataset& dataset,
                              const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::uint64_t seed,
                              const OutputParser& parser) {
  std::vector<std::vector<int>> sem_seqs, syn_seqs;
  for (const auto& [s, y] : pairs) {
    const auto& xs = dataset.examples.at(s);
    const auto& xy = dataset.examples.at(y);
    if (!xs.skeleton || !xy.skeleton) throw DataError("transfer sources need parses ('" + xs.text + "')");
    sem_seqs.push_back(xs.ids);
    syn_seqs.push_back(xy.ids);
  }
  const auto q_sem = encode_batch(model, Criterion::Semantic, sem_seqs);
  const auto q_syn = encode_batch(model, Criterion::Syntactic, syn_seqs);
  std::mt19937_64 rng(seed);
  std::vector<LatentCode> codes;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    LatentCode c;
    c.sem = reparameterize(q_sem[i], rng);
    c.syn = reparameterize(q_syn[i], rng);
    codes.push_back(std::move(c));
  }
  const auto outputs = greedy_decode(model, codes, kMaxDecodeLength);

  TransferOutcome out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& xs = dataset.examples[pairs[i].first];
    const auto& xy = dataset.examples[pairs[i].second];
    metrics::TransferItem item;
    item.x_sem = xs.tokens;
    item.x_syn = xy.tokens;
    item.output = dataset.vocab.decode(outputs[i]);
    item.sem_parse = *xs.skeleton;
    item.syn_parse = *xy.skeleton;
    item.output_parse = parser ? parser(item.output) : std::nullopt;
    out.items.push_back(std::move(item));
  }
  out.report = metrics::summarize_transfer(out.items);
  return out;
}

metrics::CorrelationSummary subspace_correlation(const Model& model, const std::vector<std::vector<int>>& seqs) {
  if (seqs.size() < 2) throw ContractError("correlation needs at least two sentences");
  const auto sem = encode_batch(model, Criterion::Semantic, seqs);
  const auto syn = encode_batch(model, Criterion::Syntactic, seqs);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    a.insert(a.end(), sem[i].mean.begin(), sem[i].mean.end());
    b.insert(b.end(), syn[i].mean.begin(), syn[i].mean.end());
  }
  return metrics::cross_correlation(a, model.config().sem_dim, b, model.config().syn_dim);
}

double reconstruction_bleu(const Model& model, const data::Dataset& dataset, const std::vector<std::size_t>& indices,
                           std::uint64_t seed) {
  std::vector<std::vector<int>> seqs;
  for (std::size_t i : indices) seqs.push_back(dataset.examples.at(i).ids);
  const auto q_sem = encode_batch(model, Criterion::Semantic, seqs);
  const auto q_syn = encode_batch(model, Criterion::Syntactic, seqs);
  std::mt19937_64 rng(seed);
  std::vector<LatentCode> codes;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    LatentCode c;
    c.sem = reparameterize(q_sem[i], rng);
    c.syn = reparameterize(q_syn[i], rng);
    codes.push_back(std::move(c));
  }
  const auto outputs = greedy_decode(model, codes, kMaxDecodeLength);
  std::vector<metrics::Tokens> cands, refs;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    cands.push_back(dataset.vocab.decode(outputs[i]));
    refs.push_back(dataset.examples[indices[i]].tokens);
  }
  return 100.0 * metrics::corpus_bleu(cands, refs);
}

std::vector<std::vector<int>> sample_prior(const Model& model, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<LatentCode> codes(count);
  for (auto& c : codes) {
    c.sem.resize(model.config().sem_dim);
    c.syn.resize(model.config().syn_dim);
    for (double& v : c.sem) v = normal(rng);
    for (double& v : c.syn) v = normal(rng);
  }
  return greedy_decode(model, codes, kMaxDecodeLength);
}

double sample_forward_ppl(const Model& model, const data::Vocab& vocab, const metrics::NGramLM& lm,
                          std::size_t count, std::uint64_t seed) {
  std::vector<metrics::NGramLM::Sentence> sentences;
  for (const auto& ids : sample_prior(model, count, seed)) sentences.push_back(vocab.decode(ids));
  return metrics::forward_ppl(lm, sentences);
}

}  // namespace pvae::model
