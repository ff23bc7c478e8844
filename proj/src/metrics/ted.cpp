#include "pvae/metrics/ted.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace pvae::metrics {
namespace {

// Postorder view of a tree: labels, leftmost-leaf descendant per node, keyroots.
struct Indexed {
  std::vector<const std::string*> label;
  std::vector<int> leftmost;
  std::vector<int> keyroots;

  explicit Indexed(const ParseTree& t) {
    visit(t);
    // A keyroot is the highest node for each distinct leftmost leaf.
    const int n = static_cast<int>(label.size());
    std::vector<int> highest(n, -1);
    for (int i = 0; i < n; ++i) highest[leftmost[i]] = i;
    for (int i = 0; i < n; ++i)
      if (highest[i] >= 0) keyroots.push_back(highest[i]);
    std::sort(keyroots.begin(), keyroots.end());
  }

  int visit(const ParseTree& t) {
    int first_leaf = -1;
    for (const auto& c : t.children) {
      const int l = visit(c);
      if (first_leaf < 0) first_leaf = l;
    }
    const int self = static_cast<int>(label.size());
    label.push_back(&t.label);
    leftmost.push_back(first_leaf < 0 ? self : first_leaf);
    return leftmost.back();
  }
};

}  // namespace

int tree_edit_distance(const ParseTree& a, const ParseTree& b) {
  const Indexed A(a), B(b);
  const int n = static_cast<int>(A.label.size());
  const int m = static_cast<int>(B.label.size());
  std::vector<int> tree_dist(static_cast<std::size_t>(n) * m, 0);
  std::vector<int> forest((n + 1) * static_cast<std::size_t>(m + 1), 0);
  auto fd = [&](int x, int y) -> int& { return forest[static_cast<std::size_t>(x) * (m + 1) + y]; };

  for (int i : A.keyroots) {
    for (int j : B.keyroots) {
      const int li = A.leftmost[i], lj = B.leftmost[j];
      // Forest indices are offset so that (li - 1) maps to 0.
      const int rows = i - li + 2, cols = j - lj + 2;
      fd(0, 0) = 0;
      for (int x = 1; x < rows; ++x) fd(x, 0) = fd(x - 1, 0) + 1;
      for (int y = 1; y < cols; ++y) fd(0, y) = fd(0, y - 1) + 1;
      for (int x = 1; x < rows; ++x) {
        const int ni = li + x - 1;
        for (int y = 1; y < cols; ++y) {
          const int nj = lj + y - 1;
          const int del = fd(x - 1, y) + 1;
          const int ins = fd(x, y - 1) + 1;
          if (A.leftmost[ni] == li && B.leftmost[nj] == lj) {
            const int ren = fd(x - 1, y - 1) + (*A.label[ni] == *B.label[nj] ? 0 : 1);
            fd(x, y) = std::min({del, ins, ren});
            tree_dist[static_cast<std::size_t>(ni) * m + nj] = fd(x, y);
          } else {
            const int px = A.leftmost[ni] - li;  // forest up to just before ni's subtree
            const int py = B.leftmost[nj] - lj;
            const int sub = fd(px, py) + tree_dist[static_cast<std::size_t>(ni) * m + nj];
            fd(x, y) = std::min({del, ins, sub});
          }
        }
      }
    }
  }
  return tree_dist[static_cast<std::size_t>(n - 1) * m + (m - 1)];
}

}  // namespace pvae::metrics
