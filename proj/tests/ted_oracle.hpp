#pragma once

// Exhaustive edit-distance search over small labeled ordered forests.
// States are all forests with at most `max_nodes` nodes; edges are single
// unit-cost deletes, inserts and renames. Breadth-first search from a tree
// gives its exact distance to every other state reachable without exceeding
// the node bound. Intermediate forests never need more nodes than the larger
// operand, so the bound does not cut off optimal scripts.

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pvae/metrics/parse_tree.hpp"

namespace pvae::testing {

struct SmallNode {
  char label;
  std::vector<SmallNode> kids;
};
using SmallForest = std::vector<SmallNode>;

inline void encode(const SmallForest& f, std::string& out) {
  for (const auto& n : f) {
    out += n.label;
    out += '(';
    encode(n.kids, out);
    out += ')';
  }
}

inline std::string encode(const SmallForest& f) {
  std::string s;
  encode(f, s);
  return s;
}

inline std::size_t count_nodes(const SmallForest& f) {
  std::size_t n = 0;
  for (const auto& x : f) n += 1 + count_nodes(x.kids);
  return n;
}

/// Every forest with exactly `n` nodes over `labels`.
inline std::vector<SmallForest> all_forests(int n, const std::string& labels) {
  static std::unordered_map<std::string, std::vector<SmallForest>> memo;
  const std::string key = std::to_string(n) + labels;
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::vector<SmallForest> out;
  if (n == 0) {
    out.push_back({});
  } else {
    for (int k = 0; k < n; ++k) {  // k nodes below the first root
      for (const auto& kids : all_forests(k, labels)) {
        for (const auto& rest : all_forests(n - 1 - k, labels)) {
          for (char l : labels) {
            SmallForest f{SmallNode{l, kids}};
            f.insert(f.end(), rest.begin(), rest.end());
            out.push_back(std::move(f));
          }
        }
      }
    }
  }
  memo[key] = out;
  return out;
}

/// Calls visit(forest) for each forest one edit away from f.
template <class Visit>
void for_each_neighbor(const SmallForest& f, const std::string& labels, std::size_t max_nodes, Visit visit) {
  const std::size_t size = count_nodes(f);
  // Applies edits at every sibling list reachable from `list` and rebuilds via `wrap`.
  using Wrap = std::function<SmallForest(const SmallForest&)>;
  auto recurse = [&](auto& self, const SmallForest& list, const Wrap& wrap) -> void {
    for (std::size_t i = 0; i < list.size(); ++i) {
      // Delete node i, splicing its children in place.
      SmallForest del(list.begin(), list.begin() + i);
      del.insert(del.end(), list[i].kids.begin(), list[i].kids.end());
      del.insert(del.end(), list.begin() + i + 1, list.end());
      visit(wrap(del));
      for (char l : labels) {
        if (l == list[i].label) continue;
        SmallForest ren = list;
        ren[i].label = l;
        visit(wrap(ren));
      }
      const Wrap inner = [&, i](const SmallForest& kids) {
        SmallForest copy = list;
        copy[i].kids = kids;
        return wrap(copy);
      };
      self(self, list[i].kids, inner);
    }
    if (size < max_nodes) {
      // Insert a node adopting the consecutive siblings [a, b).
      for (std::size_t a = 0; a <= list.size(); ++a) {
        for (std::size_t b = a; b <= list.size(); ++b) {
          for (char l : labels) {
            SmallForest ins(list.begin(), list.begin() + a);
            ins.push_back(SmallNode{l, SmallForest(list.begin() + a, list.begin() + b)});
            ins.insert(ins.end(), list.begin() + b, list.end());
            visit(wrap(ins));
          }
        }
      }
    }
  };
  recurse(recurse, f, Wrap([](const SmallForest& x) { return x; }));
}

class BruteForceTed {
 public:
  BruteForceTed(std::size_t max_nodes, std::string labels) : labels_(std::move(labels)) {
    for (std::size_t n = 0; n <= max_nodes; ++n) {
      for (auto& f : all_forests(static_cast<int>(n), labels_)) {
        id_[encode(f)] = static_cast<int>(states_.size());
        states_.push_back(std::move(f));
      }
    }
    edges_.resize(states_.size());
    for (std::size_t s = 0; s < states_.size(); ++s) {
      for_each_neighbor(states_[s], labels_, max_nodes,
                        [&](const SmallForest& g) { edges_[s].push_back(id_.at(encode(g))); });
    }
  }

  const std::vector<SmallForest>& states() const { return states_; }
  int id(const SmallForest& f) const { return id_.at(encode(f)); }

  /// Distances from state `from` to every state.
  std::vector<int> distances_from(int from) const {
    std::vector<int> dist(states_.size(), -1);
    std::deque<int> queue{from};
    dist[from] = 0;
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      for (int t : edges_[s]) {
        if (dist[t] < 0) {
          dist[t] = dist[s] + 1;
          queue.push_back(t);
        }
      }
    }
    return dist;
  }

 private:
  std::string labels_;
  std::vector<SmallForest> states_;
  std::unordered_map<std::string, int> id_;
  std::vector<std::vector<int>> edges_;
};

inline metrics::ParseTree to_parse_tree(const SmallNode& n) {
  metrics::ParseTree t;
  t.label = std::string(1, n.label);
  for (const auto& k : n.kids) t.children.push_back(to_parse_tree(k));
  return t;
}

}  // namespace pvae::testing
