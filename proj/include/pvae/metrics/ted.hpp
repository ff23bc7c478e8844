#pragma once

#include "pvae/metrics/parse_tree.hpp"

namespace pvae::metrics {

/// Zhang-Shasha ordered tree edit distance with unit insert/delete/rename costs.
int tree_edit_distance(const ParseTree& a, const ParseTree& b);

}  // namespace pvae::metrics
