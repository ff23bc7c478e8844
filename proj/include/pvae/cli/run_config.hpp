#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pvae/data/synthetic.hpp"
#include "pvae/model/model.hpp"
#include "pvae/model/train.hpp"
#include "pvae/similarity/similarity.hpp"

namespace pvae::cli {

/// Everything a run reads. Built from defaults, then a key=value config file,
/// then explicit flags, in that order.
struct RunConfig {
  std::string command;
  std::string data;
  std::string checkpoint;
  std::string report;

  model::TrainingConfig train;
  model::ModelConfig model;
  std::size_t min_freq = 1;
  similarity::Variant sem_variant = similarity::Variant::GroundTruthFactor;
  similarity::Variant syn_variant = similarity::Variant::GroundTruthFactor;
  std::optional<double> sem_threshold;
  std::optional<double> syn_threshold;
  data::SyntheticSpec synth;

  std::size_t pairs = 500;
  std::size_t count = 1000;
  std::vector<double> kl_sweep;
  double temperature = 0.0;

  std::vector<similarity::SimilarityCriterion> criteria() const;
};

/// Names of every accepted key, in echo order.
const std::vector<std::string>& config_keys();

/// Sets one key. Throws ConfigError naming the key for unknown keys or bad values.
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// Canonical value of `key` for manifests.
std::string get_key(const RunConfig& cfg, const std::string& key);

/// Applies a key=value file ('#' comments and blank lines allowed). Keys may
/// use '-' or '_'. Throws IoError if unreadable, ConfigError on a bad line.
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Shortest decimal form that round-trips.
std::string format_double(double v);

}  // namespace pvae::cli
