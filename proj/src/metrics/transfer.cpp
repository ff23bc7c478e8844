#include "pvae/metrics/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "pvae/errors.hpp"
#include "pvae/metrics/ted.hpp"

namespace pvae::metrics {

double gm(double a, double b) {
  if (a < 0.0 || b < 0.0) throw ContractError("gm: arguments must be non-negative");
  return std::sqrt(a * b);
}

TransferReport summarize_transfer(const std::vector<TransferItem>& items) {
  TransferReport r;
  std::vector<Tokens> out, sem, syn;
  double ted_sem = 0.0, ted_syn = 0.0;
  for (const auto& it : items) {
    if (!it.output_parse) {
      ++r.excluded;
      continue;
    }
    out.push_back(it.output);
    sem.push_back(it.x_sem);
    syn.push_back(it.x_syn);
    ted_sem += tree_edit_distance(*it.output_parse, it.sem_parse);
    ted_syn += tree_edit_distance(*it.output_parse, it.syn_parse);
  }
  r.pairs = out.size();
  if (r.pairs == 0) return r;
  r.bleu_sem = 100.0 * corpus_bleu(out, sem);
  r.bleu_syn = 100.0 * corpus_bleu(out, syn);
  r.ted_sem = ted_sem / static_cast<double>(r.pairs);
  r.ted_syn = ted_syn / static_cast<double>(r.pairs);
  r.delta_bleu = r.bleu_sem - r.bleu_syn;
  r.delta_ted = r.ted_sem - r.ted_syn;
  r.delta_gm = gm(std::max(r.delta_bleu, 0.0), std::max(r.delta_ted, 0.0));
  return r;
}

}  // namespace pvae::metrics
