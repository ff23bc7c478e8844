#include "pvae/metrics/parse_tree.hpp"

#include <cctype>

#include "pvae/errors.hpp"

namespace pvae::metrics {

std::size_t ParseTree::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

std::size_t ParseTree::leaf_count() const {
  if (children.empty()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

std::vector<std::string> ParseTree::leaves() const {
  std::vector<std::string> out;
  auto walk = [&out](const ParseTree& t, auto&& self) -> void {
    if (t.children.empty()) {
      out.push_back(t.label);
      return;
    }
    for (const auto& c : t.children) self(c, self);
  };
  walk(*this, walk);
  return out;
}

namespace {

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : s_(text) {}

  ParseTree parse_document() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("empty tree text", pos_);
    if (s_[pos_] != '(') throw ParseError("expected '('", pos_);
    ParseTree t = parse_node();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("trailing characters after tree", pos_);
    return t;
  }

 private:
  static bool is_delim(char c) { return c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c)); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string read_token() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !is_delim(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  // Precondition: s_[pos_] == '('.
  ParseTree parse_node() {
    const std::size_t open = pos_;
    ++pos_;
    skip_ws();
    ParseTree node;
    node.label = read_token();
    if (node.label.empty()) throw ParseError("empty label", pos_);
    while (true) {
      skip_ws();
      if (pos_ >= s_.size()) throw ParseError("unbalanced brackets: '(' never closed", open);
      const char c = s_[pos_];
      if (c == ')') {
        ++pos_;
        return node;
      }
      if (c == '(') {
        node.children.push_back(parse_node());
      } else {
        ParseTree leaf;
        leaf.label = read_token();
        leaf.terminal = true;
        node.children.push_back(std::move(leaf));
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

void write(const ParseTree& t, std::string& out) {
  if (t.terminal) {
    out += t.label;
    return;
  }
  out += '(';
  out += t.label;
  for (const auto& c : t.children) {
    out += ' ';
    write(c, out);
  }
  out += ')';
}

}  // namespace

ParseTree parse_bracketed(std::string_view text) {
  BracketParser p(text);
  return p.parse_document();
}

std::string serialize(const ParseTree& tree) {
  std::string out;
  write(tree, out);
  return out;
}

ParseTree strip_terminals(const ParseTree& tree) {
  ParseTree out;
  out.label = tree.label;
  out.terminal = tree.terminal;
  for (const auto& c : tree.children) {
    if (c.terminal) continue;
    out.children.push_back(strip_terminals(c));
  }
  return out;
}

}  // namespace pvae::metrics
