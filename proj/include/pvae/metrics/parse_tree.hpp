#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pvae::metrics {

/// Labeled ordered tree. `terminal` marks bare tokens such as the word in
/// "(DT a)"; bracketed nodes like "(X)" are non-terminal even without children.
struct ParseTree {
  std::string label;
  std::vector<ParseTree> children;
  bool terminal = false;

  bool is_leaf() const noexcept { return children.empty(); }
  std::size_t size() const;
  std::size_t leaf_count() const;
  std::vector<std::string> leaves() const;

  friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

/// Recursive-descent parser for "(S (NP (DT a) (NN man)) (VP (VBZ works)))".
/// Whitespace between tokens is free-form. Throws ParseError with the byte
/// offset of the first problem.
ParseTree parse_bracketed(std::string_view text);

/// Canonical form: single spaces, terminals bare, every other node bracketed.
std::string serialize(const ParseTree& tree);

/// Drops terminal tokens, leaving the constituent skeleton (pre-terminals become leaves).
ParseTree strip_terminals(const ParseTree& tree);

}  // namespace pvae::metrics
