#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pvae/data/vocab.hpp"
#include "pvae/metrics/parse_tree.hpp"

namespace pvae::data {

enum class EntailmentLabel { Entailment, Neutral, Contradiction };

std::optional<EntailmentLabel> parse_entailment_label(const std::string& s);
std::string to_string(EntailmentLabel label);

/// One sentence with whatever annotations its source provides.
struct SentenceExample {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<int> ids;  // filled by Dataset::index
  std::optional<metrics::ParseTree> parse;
  std::optional<metrics::ParseTree> skeleton;  // parse without terminals
  /// Entailment relation to the other sentence of the same pair.
  std::optional<std::size_t> pair_id;
  std::optional<EntailmentLabel> label;
  /// Ground-truth factors (synthetic corpora only).
  std::optional<int> content_id;
  std::optional<int> template_id;

  /// Builds text/tokens and, when given, validates the parse (leaf count must
  /// equal the token count). Throws DataError on mismatch.
  static SentenceExample make(const std::string& text, const std::optional<std::string>& bracketed = std::nullopt);

  void set_parse(metrics::ParseTree tree);
};

struct Dataset {
  Vocab vocab;
  std::vector<SentenceExample> examples;

  /// Encodes every example's tokens with `vocab`.
  void index();
  std::vector<std::vector<std::string>> token_lists() const;
};

}  // namespace pvae::data
