#include "pvae/cli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "pvae/cli/report.hpp"
#include "pvae/cli/run_config.hpp"
#include "pvae/data/pairs.hpp"
#include "pvae/data/synthetic.hpp"
#include "pvae/data/tokenize.hpp"
#include "pvae/errors.hpp"
#include "pvae/metrics/ngram_lm.hpp"
#include "pvae/model/checkpoint.hpp"
#include "pvae/model/evaluate.hpp"
#include "pvae/model/train.hpp"

namespace pvae::cli {
namespace {

namespace fs = std::filesystem;

const char* const kCommands[] = {"gen-synth", "train",  "eval-recon", "eval-transfer",
                                 "transfer-examples", "corr", "sample", "grad-check"};

constexpr double kGradCheckTolerance = 1e-4;

struct Context {
  RunConfig cfg;
  std::string config_path;
  std::ostream& out;
  std::ostream& err;
  ReportWriter report;
};

void require_readable(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("--") + what + " is required for this command");
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " file '" + path + "' does not exist");
}

void require_writable_parent(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("--") + what + " is required for this command");
  const fs::path parent = fs::absolute(path).parent_path();
  if (!fs::is_directory(parent)) {
    throw IoError(std::string(what) + " directory '" + parent.string() + "' does not exist");
  }
}

/// First record of every report: command, full config echo and input hashes.
void write_manifest(Context& ctx, const std::vector<std::pair<std::string, std::string>>& inputs) {
  Record r{{"record", "manifest"}, {"command", ctx.cfg.command}};
  for (const auto& key : config_keys()) r.emplace_back(key, get_key(ctx.cfg, key));
  if (!ctx.config_path.empty()) r.emplace_back("input.config.sha256", sha256_file(ctx.config_path));
  for (const auto& [name, path] : inputs) r.emplace_back("input." + name + ".sha256", sha256_file(path));
  ctx.report.add(r);
}

std::vector<data::SentenceExample> load_examples(Context& ctx, const std::string& path) {
  {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    if (first == "# synthetic") return data::read_synthetic(path);
  }
  auto loaded = data::load_pairs(path);
  for (const auto& d : loaded.diagnostics) ctx.err << "warning: " << path << ": " << d << '\n';
  return data::flatten_pairs(loaded.pairs);
}

std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

struct Loaded {
  model::Model model;
  data::Dataset dataset;
};

model::Checkpoint read_checkpoint(const std::string& path) {
  auto ck = model::load_checkpoint(path);
  if (!ck.meta.count("vocab")) throw DataError("checkpoint '" + path + "' has no vocabulary");
  return ck;
}

data::Vocab checkpoint_vocab(const model::Checkpoint& ck, const std::string& path) {
  auto vocab = data::Vocab::from_tokens(split_spaces(ck.meta.at("vocab")));
  if (vocab.size() != ck.model.config().vocab_size) {
    throw DataError("checkpoint '" + path + "': vocabulary size disagrees with the model");
  }
  return vocab;
}

Loaded load_model_and_data(Context& ctx) {
  require_readable(ctx.cfg.checkpoint, "checkpoint");
  require_readable(ctx.cfg.data, "data");
  auto ck = read_checkpoint(ctx.cfg.checkpoint);
  data::Dataset ds;
  ds.vocab = checkpoint_vocab(ck, ctx.cfg.checkpoint);
  ds.examples = load_examples(ctx, ctx.cfg.data);
  ds.index();
  for (const auto& ex : ds.examples) {
    if (ex.ids.empty()) throw DataError("empty sentence in '" + ctx.cfg.data + "'");
  }
  return {std::move(ck.model), std::move(ds)};
}

data::Dataset training_dataset(Context& ctx) {
  data::Dataset ds;
  ds.examples = load_examples(ctx, ctx.cfg.data);
  ds.vocab = data::Vocab::build(ds.token_lists(), ctx.cfg.min_freq);
  ds.index();
  return ds;
}

model::Model train_model(Context& ctx, const data::Dataset& ds, const model::TrainingConfig& tc,
                         const Record& tag) {
  model::ModelConfig mc = ctx.cfg.model;
  mc.vocab_size = ds.vocab.size();
  model::Model m(mc, tc.seed);
  model::train(m, ds, ctx.cfg.criteria(), tc, [&](const model::EpochReport& e) {
    Record r{{"record", "epoch"}};
    r.insert(r.end(), tag.begin(), tag.end());
    r.insert(r.end(), {{"epoch", std::to_string(e.epoch)},
                       {"steps", std::to_string(e.mean.step)},
                       {"kl_weight", format_double(e.mean.kl_weight)},
                       {"rec", format_double(e.mean.rec)},
                       {"kl_sem", format_double(e.mean.kl_sem)},
                       {"kl_syn", format_double(e.mean.kl_syn)},
                       {"prox_sem", format_double(e.mean.prox_sem)},
                       {"prox_syn", format_double(e.mean.prox_syn)},
                       {"total", format_double(e.mean.total)},
                       {"skipped_anchors", std::to_string(e.skipped_anchors)}});
    ctx.report.add(r);
  });
  return m;
}

int cmd_gen_synth(Context& ctx) {
  require_writable_parent(ctx.cfg.data, "data");
  data::SyntheticSpec spec = ctx.cfg.synth;
  spec.seed = ctx.cfg.train.seed;
  const auto corpus = data::generate_synthetic(spec);
  data::write_synthetic(ctx.cfg.data, corpus.examples);
  write_manifest(ctx, {});
  std::set<std::string> distinct;
  for (const auto& ex : corpus.examples) distinct.insert(ex.text);
  ctx.report.add({{"record", "corpus"},
                  {"path", ctx.cfg.data},
                  {"sentences", std::to_string(corpus.examples.size())},
                  {"distinct", std::to_string(distinct.size())},
                  {"sha256", sha256_file(ctx.cfg.data)}});
  return kOk;
}

int cmd_train(Context& ctx) {
  require_readable(ctx.cfg.data, "data");
  require_writable_parent(ctx.cfg.checkpoint, "checkpoint");
  ctx.cfg.train.validate();
  ctx.cfg.criteria();
  write_manifest(ctx, {{"data", ctx.cfg.data}});
  const auto ds = training_dataset(ctx);
  const auto model = train_model(ctx, ds, ctx.cfg.train, {});
  std::map<std::string, std::string> meta{{"vocab", data::join(ds.vocab.tokens())}};
  for (const auto& key : config_keys()) {
    if (key != "checkpoint" && key != "report") meta["run." + key] = get_key(ctx.cfg, key);
  }
  model::save_checkpoint(ctx.cfg.checkpoint, model, meta);
  ctx.report.add({{"record", "checkpoint"}, {"path", ctx.cfg.checkpoint}, {"sha256", sha256_file(ctx.cfg.checkpoint)}});
  return kOk;
}

std::vector<std::size_t> first_indices(std::size_t n, std::size_t count) {
  std::vector<std::size_t> idx(std::min(n, count));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

metrics::NGramLM reference_lm(const data::Dataset& ds) { return metrics::NGramLM::train(ds.token_lists(), 3, 0.75); }

int cmd_eval_recon(Context& ctx) {
  const std::uint64_t seed = ctx.cfg.train.seed;
  if (ctx.cfg.kl_sweep.empty()) {
    auto [m, ds] = load_model_and_data(ctx);
    write_manifest(ctx, {{"data", ctx.cfg.data}, {"checkpoint", ctx.cfg.checkpoint}});
    const double bleu = model::reconstruction_bleu(m, ds, first_indices(ds.examples.size(), ctx.cfg.count), seed);
    const double ppl = model::sample_forward_ppl(m, ds.vocab, reference_lm(ds), ctx.cfg.count, seed);
    ctx.report.add({{"record", "recon"}, {"recon_bleu", format_double(bleu)}, {"forward_ppl", format_double(ppl)}});
    return kOk;
  }
  require_readable(ctx.cfg.data, "data");
  ctx.cfg.train.validate();
  ctx.cfg.criteria();
  write_manifest(ctx, {{"data", ctx.cfg.data}});
  const auto ds = training_dataset(ctx);
  const auto lm = reference_lm(ds);
  for (double cap : ctx.cfg.kl_sweep) {
    model::TrainingConfig tc = ctx.cfg.train;
    tc.kl_cap = cap;
    const auto m = train_model(ctx, ds, tc, {{"kl_cap", format_double(cap)}});
    const double bleu = model::reconstruction_bleu(m, ds, first_indices(ds.examples.size(), ctx.cfg.count), seed);
    const double ppl = model::sample_forward_ppl(m, ds.vocab, lm, ctx.cfg.count, seed);
    ctx.report.add({{"record", "recon"},
                    {"kl_cap", format_double(cap)},
                    {"recon_bleu", format_double(bleu)},
                    {"forward_ppl", format_double(ppl)}});
  }
  return kOk;
}

int cmd_eval_transfer(Context& ctx, bool examples) {
  auto [m, ds] = load_model_and_data(ctx);
  write_manifest(ctx, {{"data", ctx.cfg.data}, {"checkpoint", ctx.cfg.checkpoint}});
  const std::uint64_t seed = ctx.cfg.train.seed;
  const auto pairs = model::transfer_pairs(ds.examples, ctx.cfg.pairs, seed);
  const auto outcome = model::transfer_eval(m, ds, pairs, seed);
  if (examples) {
    for (const auto& item : outcome.items) {
      ctx.report.add({{"record", "example"},
                      {"x_sem", data::join(item.x_sem)},
                      {"x_syn", data::join(item.x_syn)},
                      {"output", data::join(item.output)}});
    }
    return kOk;
  }
  const auto& r = outcome.report;
  ctx.report.add({{"record", "transfer"},
                  {"bleu_sem", format_double(r.bleu_sem)},
                  {"bleu_syn", format_double(r.bleu_syn)},
                  {"delta_bleu", format_double(r.delta_bleu)},
                  {"ted_sem", format_double(r.ted_sem)},
                  {"ted_syn", format_double(r.ted_syn)},
                  {"delta_ted", format_double(r.delta_ted)},
                  {"delta_gm", format_double(r.delta_gm)},
                  {"pairs", std::to_string(r.pairs)},
                  {"excluded", std::to_string(r.excluded)}});
  return kOk;
}

int cmd_corr(Context& ctx) {
  auto [m, ds] = load_model_and_data(ctx);
  write_manifest(ctx, {{"data", ctx.cfg.data}, {"checkpoint", ctx.cfg.checkpoint}});
  std::vector<std::vector<int>> seqs;
  for (std::size_t i : first_indices(ds.examples.size(), ctx.cfg.count)) seqs.push_back(ds.examples[i].ids);
  const auto c = model::subspace_correlation(m, seqs);
  ctx.report.add({{"record", "correlation"},
                  {"sentences", std::to_string(seqs.size())},
                  {"max_abs", format_double(c.max_abs)},
                  {"mean_abs", format_double(c.mean_abs)},
                  {"pairs", std::to_string(c.pairs)},
                  {"zero_variance_pairs", std::to_string(c.zero_variance_pairs)}});
  return kOk;
}

int cmd_sample(Context& ctx) {
  require_readable(ctx.cfg.checkpoint, "checkpoint");
  const auto ck = read_checkpoint(ctx.cfg.checkpoint);
  const auto vocab = checkpoint_vocab(ck, ctx.cfg.checkpoint);
  write_manifest(ctx, {{"checkpoint", ctx.cfg.checkpoint}});
  std::vector<std::vector<int>> outputs;
  if (ctx.cfg.temperature > 0.0) {
    std::mt19937_64 rng(ctx.cfg.train.seed);
    std::normal_distribution<double> normal;
    std::vector<model::LatentCode> codes(ctx.cfg.count);
    for (auto& c : codes) {
      c.sem.resize(ck.model.config().sem_dim);
      c.syn.resize(ck.model.config().syn_dim);
      for (double& v : c.sem) v = normal(rng);
      for (double& v : c.syn) v = normal(rng);
    }
    outputs = model::sample_decode(ck.model, codes, model::kMaxDecodeLength, ctx.cfg.temperature, rng);
  } else {
    outputs = model::sample_prior(ck.model, ctx.cfg.count, ctx.cfg.train.seed);
  }
  for (const auto& ids : outputs) ctx.report.add({{"record", "sample"}, {"text", data::join(vocab.decode(ids))}});
  return kOk;
}

int cmd_grad_check(Context& ctx) {
  write_manifest(ctx, {});
  int status = kOk;
  for (auto kind : {proximity::ProximityKind::Cosine, proximity::ProximityKind::Hellinger,
                    proximity::ProximityKind::Kl, proximity::ProximityKind::GeneralizedJs,
                    proximity::ProximityKind::Mmd}) {
    const auto check = model::micro_objective_grad_check(ctx.cfg.train.seed, kind);
    const auto& r = check.result;
    const bool pass = r.max_rel_error < kGradCheckTolerance;
    if (!pass) status = kNumericError;
    ctx.report.add({{"record", "grad_check"},
                    {"proximity", proximity::to_string(kind)},
                    {"coordinates", std::to_string(r.coordinates)},
                    {"max_rel_error", format_double(r.max_rel_error)},
                    {"worst_parameter", r.worst_parameter},
                    {"worst_index", std::to_string(r.worst_index)},
                    {"kink_adjacent_skipped", std::to_string(check.kink_adjacent_skipped)},
                    {"pass", pass ? "1" : "0"}});
  }
  return status;
}

int dispatch(Context& ctx) {
  const std::string& c = ctx.cfg.command;
  if (c == "gen-synth") return cmd_gen_synth(ctx);
  if (c == "train") return cmd_train(ctx);
  if (c == "eval-recon") return cmd_eval_recon(ctx);
  if (c == "eval-transfer") return cmd_eval_transfer(ctx, false);
  if (c == "transfer-examples") return cmd_eval_transfer(ctx, true);
  if (c == "corr") return cmd_corr(ctx);
  if (c == "sample") return cmd_sample(ctx);
  if (c == "grad-check") return cmd_grad_check(ctx);
  throw ConfigError("unknown subcommand '" + c + "'");
}

void emit(Context& ctx) {
  if (ctx.cfg.report.empty()) {
    ctx.out << ctx.report.text();
    return;
  }
  std::ofstream f(ctx.cfg.report, std::ios::binary);
  if (!f) throw IoError("cannot write report '" + ctx.cfg.report + "'");
  f << ctx.report.text();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pvae: train, transfer and evaluate a sentence VAE with semantic and syntactic latent subspaces",
               "pvae"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Context ctx{RunConfig{}, "", out, err, {}};
  app.add_option("--config", ctx.config_path, "key=value config file (flags override it)");
  std::map<std::string, std::string> flags;
  const std::map<std::string, std::string> help{
      {"data", "corpus or pair file (output path for gen-synth)"},
      {"checkpoint", "model checkpoint path"},
      {"report", "report output path (default: stdout)"},
      {"seed", "random seed"},
      {"lambda-kl", "KL weight cap"},
      {"lambda-sem", "semantic proximity weight"},
      {"lambda-syn", "syntactic proximity weight"},
      {"proximity", "cosine|hellinger|kl|js|mmd"},
      {"sem-variant", "entailment|wo|len|ted|gt"},
      {"syn-variant", "entailment|wo|len|ted|gt"},
      {"negatives", "negatives per anchor"},
      {"epochs", "training epochs"}};
  for (const auto& key : config_keys()) {
    auto it = help.find(key);
    app.add_option("--" + key, flags[key], it != help.end() ? it->second : key);
  }
  for (const char* name : kCommands) app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    ctx.cfg.command = app.get_subcommands().front()->get_name();
    if (!ctx.config_path.empty()) apply_config_file(ctx.cfg, ctx.config_path);
    for (const auto& key : config_keys()) {
      if (app.count("--" + key) > 0) set_key(ctx.cfg, key, flags[key]);
    }
    if (!ctx.cfg.report.empty()) require_writable_parent(ctx.cfg.report, "report");
    const int status = dispatch(ctx);
    emit(ctx);
    return status;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace pvae::cli
