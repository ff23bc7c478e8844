#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pvae/data/example.hpp"

namespace pvae::data {

/// Controlled-factor corpus: a sentence is a template (syntax) filled with a
/// content tuple (semantics). Both factors are drawn independently.
struct SyntheticSpec {
  int contents = 24;
  int templates = 6;
  std::size_t size = 5000;
  std::uint64_t seed = 1;
};

struct ContentTuple {
  std::string adjective;
  std::string subject;
  std::string verb;        // present tense, e.g. "chases"
  std::string participle;  // e.g. "chased"
  std::string object;
};

/// A sentence skeleton. Slots in `bracketed` are $ADJ, $SUBJ, $VERB, $VERBN, $OBJ.
struct SentenceTemplate {
  std::string bracketed;
  /// Token pattern with the slot names in place of content words.
  std::vector<std::string> pattern() const;
  std::string fill(const ContentTuple& c) const;
};

/// The fixed template inventory (6 skeletons, distinct lengths).
const std::vector<SentenceTemplate>& synthetic_templates();

/// Draws `spec.contents` distinct content tuples from the built-in word lists.
std::vector<ContentTuple> synthetic_contents(int count, std::mt19937_64& rng);

struct SyntheticCorpus {
  std::vector<ContentTuple> contents;
  std::vector<SentenceExample> examples;
};

/// Deterministic per `spec.seed`. Throws ConfigError for an invalid spec and
/// DataError if a content word collides with a template function word.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Nearest template by token-level edit distance, where slots match any
/// token. Returns nullopt when the best distance exceeds `max_distance`.
/// Ties go to the lowest template index.
std::optional<int> match_template(const std::vector<std::string>& tokens, int max_distance = 2);

/// Corpus file: a "# synthetic" header, then text \t parse \t content_id \t template_id.
void write_synthetic(const std::string& path, const std::vector<SentenceExample>& examples);
std::vector<SentenceExample> read_synthetic(const std::string& path);

}  // namespace pvae::data
