#include "pvae/cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "pvae/errors.hpp"

namespace pvae::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string normalize(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key size_key(const char* name, T RunConfig::*field) {
  return {name, [=](RunConfig& c, const std::string& v) { c.*field = static_cast<T>(to_u64(name, v)); },
          [=](const RunConfig& c) { return std::to_string(c.*field); }};
}

Key double_key(const char* name, double model::TrainingConfig::*field) {
  return {name, [=](RunConfig& c, const std::string& v) { c.train.*field = to_double(name, v); },
          [=](const RunConfig& c) { return format_double(c.train.*field); }};
}

template <class T>
Key train_size_key(const char* name, T model::TrainingConfig::*field) {
  return {name, [=](RunConfig& c, const std::string& v) { c.train.*field = static_cast<T>(to_u64(name, v)); },
          [=](const RunConfig& c) { return std::to_string(c.train.*field); }};
}

Key model_key(const char* name, std::size_t model::ModelConfig::*field) {
  return {name, [=](RunConfig& c, const std::string& v) { c.model.*field = to_u64(name, v); },
          [=](const RunConfig& c) { return std::to_string(c.model.*field); }};
}

Key string_key(const char* name, std::string RunConfig::*field) {
  return {name, [=](RunConfig& c, const std::string& v) { c.*field = v; },
          [=](const RunConfig& c) { return c.*field; }};
}

Key threshold_key(const char* name, std::optional<double> RunConfig::*field) {
  return {name, [=](RunConfig& c, const std::string& v) { c.*field = to_double(name, v); },
          [=](const RunConfig& c) { return (c.*field) ? format_double(*(c.*field)) : std::string("default"); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = [] {
    std::vector<Key> v;
    v.push_back(string_key("data", &RunConfig::data));
    v.push_back(string_key("checkpoint", &RunConfig::checkpoint));
    v.push_back(string_key("report", &RunConfig::report));
    v.push_back(train_size_key("seed", &model::TrainingConfig::seed));
    v.push_back(train_size_key("epochs", &model::TrainingConfig::epochs));
    v.push_back(train_size_key("batch-size", &model::TrainingConfig::batch_size));
    v.push_back(train_size_key("negatives", &model::TrainingConfig::negatives));
    v.push_back(double_key("lambda-kl", &model::TrainingConfig::kl_cap));
    v.push_back(double_key("lambda-sem", &model::TrainingConfig::lambda_sem));
    v.push_back(double_key("lambda-syn", &model::TrainingConfig::lambda_syn));
    v.push_back(double_key("lr", &model::TrainingConfig::learning_rate));
    v.push_back(train_size_key("anneal-steps", &model::TrainingConfig::anneal_horizon));
    v.push_back(double_key("word-dropout", &model::TrainingConfig::word_dropout));
    v.push_back(double_key("margin", &model::TrainingConfig::margin));
    v.push_back({"proximity",
                 [](RunConfig& c, const std::string& s) {
                   c.train.proximity = proximity::parse_proximity_kind(s);
                 },
                 [](const RunConfig& c) { return proximity::to_string(c.train.proximity); }});
    v.push_back(train_size_key("mmd-samples", &model::TrainingConfig::mmd_samples));
    v.push_back(double_key("clip-norm", &model::TrainingConfig::clip_norm));
    v.push_back({"sem-variant",
                 [](RunConfig& c, const std::string& s) { c.sem_variant = similarity::parse_variant(s); },
                 [](const RunConfig& c) { return similarity::to_string(c.sem_variant); }});
    v.push_back({"syn-variant",
                 [](RunConfig& c, const std::string& s) { c.syn_variant = similarity::parse_variant(s); },
                 [](const RunConfig& c) { return similarity::to_string(c.syn_variant); }});
    v.push_back(threshold_key("sem-threshold", &RunConfig::sem_threshold));
    v.push_back(threshold_key("syn-threshold", &RunConfig::syn_threshold));
    v.push_back(model_key("hidden", &model::ModelConfig::hidden));
    v.push_back(model_key("embed", &model::ModelConfig::embed_dim));
    v.push_back(model_key("sem-dim", &model::ModelConfig::sem_dim));
    v.push_back(model_key("syn-dim", &model::ModelConfig::syn_dim));
    v.push_back(size_key("min-freq", &RunConfig::min_freq));
    v.push_back({"size", [](RunConfig& c, const std::string& s) { c.synth.size = to_u64("size", s); },
                 [](const RunConfig& c) { return std::to_string(c.synth.size); }});
    v.push_back({"contents",
                 [](RunConfig& c, const std::string& s) { c.synth.contents = static_cast<int>(to_u64("contents", s)); },
                 [](const RunConfig& c) { return std::to_string(c.synth.contents); }});
    v.push_back({"templates",
                 [](RunConfig& c, const std::string& s) {
                   c.synth.templates = static_cast<int>(to_u64("templates", s));
                 },
                 [](const RunConfig& c) { return std::to_string(c.synth.templates); }});
    v.push_back(size_key("pairs", &RunConfig::pairs));
    v.push_back(size_key("count", &RunConfig::count));
    v.push_back({"kl-sweep",
                 [](RunConfig& c, const std::string& s) {
                   c.kl_sweep.clear();
                   std::istringstream in(s);
                   for (std::string item; std::getline(in, item, ',');) {
                     item = trim(item);
                     if (!item.empty()) c.kl_sweep.push_back(to_double("kl-sweep", item));
                   }
                 },
                 [](const RunConfig& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.kl_sweep.size(); ++i) {
                     out += (i ? "," : "") + format_double(c.kl_sweep[i]);
                   }
                   return out.empty() ? std::string("none") : out;
                 }});
    v.push_back({"temperature",
                 [](RunConfig& c, const std::string& s) { c.temperature = to_double("temperature", s); },
                 [](const RunConfig& c) { return format_double(c.temperature); }});
    return v;
  }();
  return k;
}

const Key& find_key(const std::string& raw) {
  const std::string name = normalize(raw);
  for (const auto& k : keys()) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown config key '" + raw + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

std::vector<similarity::SimilarityCriterion> RunConfig::criteria() const {
  auto sem = similarity::SimilarityCriterion::make(similarity::Criterion::Semantic, sem_variant);
  auto syn = similarity::SimilarityCriterion::make(similarity::Criterion::Syntactic, syn_variant);
  if (sem_threshold) sem.threshold = *sem_threshold;
  if (syn_threshold) syn.threshold = *syn_threshold;
  sem.validate();
  syn.validate();
  return {sem, syn};
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : keys()) out.push_back(k.name);
    return out;
  }();
  return names;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  find_key(key).set(cfg, trim(value));
}

std::string get_key(const RunConfig& cfg, const std::string& key) { return find_key(key).get(cfg); }

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    try {
      set_key(cfg, trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace pvae::cli
