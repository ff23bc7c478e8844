#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pvae/autodiff/tape.hpp"

namespace pvae::ad {

// Matrix ops. Rank-1 operands are treated as a single row.

/// [m x k] . [k x n] -> [m x n].
Var matmul(Var a, Var b);

// Same-shape elementwise arithmetic.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

/// Adds a [1 x n] row to every row of an [m x n] matrix (bias broadcast).
Var add_row(Var a, Var row);
Var scale(Var a, double k);
Var add_scalar(Var a, double k);

Var sigmoid(Var a);
Var tanh(Var a);
Var exp(Var a);
/// Throws DomainError on non-positive input.
Var log(Var a);
/// Subgradient 0 at exactly 0.
Var sqrt(Var a);
Var square(Var a);
/// max(0, x); subgradient 0 at exactly 0.
Var relu(Var a);

/// Concatenates along columns; all parts share the row count.
Var concat(std::span<const Var> parts);
Var concat(Var a, Var b);
/// Columns [begin, begin + width).
Var slice(Var a, std::size_t begin, std::size_t width);
/// Picks rows by index (repeats allowed); backward scatter-adds.
Var gather_rows(Var a, std::vector<std::size_t> rows);
Var reshape(Var a, std::vector<std::size_t> shape);

// Reductions.
Var sum(Var a);
Var mean(Var a);
/// [m x n] -> [m x 1].
Var row_sum(Var a);
Var row_mean(Var a);
/// Row-wise Euclidean norm, [m x n] -> [m x 1].
Var l2norm(Var a);
/// Row-wise inner product of two [m x n] operands -> [m x 1].
Var dot(Var a, Var b);

/// Sum over rows of w_r * (-log softmax(logits_r)[target_r]). Rows with weight
/// zero contribute nothing but their targets must still be valid indices.
Var softmax_cross_entropy(Var logits, std::span<const int> targets, std::span<const double> weights);
/// Single-row convenience form: logits of any shape with one row, one target.
Var softmax_cross_entropy(Var logits, int target);

/// One LSTM step over a batch. `gates` is [B x 4H] pre-activations in
/// (input, forget, cell, output) order; `state` is [B x 2H] holding (h | c).
/// Rows with mask 0 carry `state` through unchanged, which is how padded
/// positions are skipped. Returns the new [B x 2H] state.
Var lstm_cell(Var gates, Var state, std::span<const double> mask);

/// Softmax of a single row of logits, max-subtracted.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace pvae::ad
