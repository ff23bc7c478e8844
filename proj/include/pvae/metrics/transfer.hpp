#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pvae/metrics/bleu.hpp"
#include "pvae/metrics/parse_tree.hpp"

namespace pvae::metrics {

/// sqrt(a * b) for a, b >= 0.
double gm(double a, double b);

/// Corpus-level transfer scores. BLEU values are scaled x100; TED values are
/// averaged sentence-level distances.
struct TransferReport {
  double bleu_sem = 0.0;
  double bleu_syn = 0.0;
  double delta_bleu = 0.0;
  double ted_sem = 0.0;
  double ted_syn = 0.0;
  double delta_ted = 0.0;
  double delta_gm = 0.0;
  std::size_t pairs = 0;
  std::size_t excluded = 0;
};

/// One transferred sentence with its sources. `output_parse` is empty when no
/// parse could be recovered; such items are excluded and counted.
struct TransferItem {
  Tokens x_sem;
  Tokens x_syn;
  Tokens output;
  ParseTree sem_parse;
  ParseTree syn_parse;
  std::optional<ParseTree> output_parse;
};

/// Aggregates items into a report. TED is computed on the trees as given.
TransferReport summarize_transfer(const std::vector<TransferItem>& items);

}  // namespace pvae::metrics
