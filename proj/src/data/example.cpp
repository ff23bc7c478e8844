#include "pvae/data/example.hpp"

#include "pvae/data/tokenize.hpp"
#include "pvae/errors.hpp"

namespace pvae::data {

std::optional<EntailmentLabel> parse_entailment_label(const std::string& s) {
  if (s == "entailment") return EntailmentLabel::Entailment;
  if (s == "neutral") return EntailmentLabel::Neutral;
  if (s == "contradiction") return EntailmentLabel::Contradiction;
  return std::nullopt;
}

std::string to_string(EntailmentLabel label) {
  switch (label) {
    case EntailmentLabel::Entailment: return "entailment";
    case EntailmentLabel::Neutral: return "neutral";
    case EntailmentLabel::Contradiction: return "contradiction";
  }
  return "?";
}

SentenceExample SentenceExample::make(const std::string& text, const std::optional<std::string>& bracketed) {
  SentenceExample ex;
  ex.text = text;
  ex.tokens = tokenize(text);
  if (bracketed) ex.set_parse(metrics::parse_bracketed(*bracketed));
  return ex;
}

void SentenceExample::set_parse(metrics::ParseTree tree) {
  if (tree.leaf_count() != tokens.size()) {
    throw DataError("parse has " + std::to_string(tree.leaf_count()) + " leaves but the sentence has " +
                    std::to_string(tokens.size()) + " tokens");
  }
  skeleton = metrics::strip_terminals(tree);
  parse = std::move(tree);
}

void Dataset::index() {
  for (auto& ex : examples) ex.ids = vocab.encode(ex.tokens);
}

std::vector<std::vector<std::string>> Dataset::token_lists() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(ex.tokens);
  return out;
}

}  // namespace pvae::data
