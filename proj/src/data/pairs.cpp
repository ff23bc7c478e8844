#include "pvae/data/pairs.hpp"

#include <fstream>
#include <sstream>

#include "pvae/errors.hpp"

namespace pvae::data {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) out.push_back(field);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

}  // namespace

PairLoadResult load_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read pair file '" + path + "'");

  PairLoadResult r;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++r.total_lines;
    auto reject = [&](const std::string& why) {
      ++r.malformed;
      r.diagnostics.push_back("line " + std::to_string(lineno) + ": " + why);
    };
    const auto f = split_tabs(line);
    if (f.size() != 3 && f.size() != 5) {
      reject("expected 3 or 5 tab-separated fields, got " + std::to_string(f.size()));
      continue;
    }
    const auto label = parse_entailment_label(f[2]);
    if (!label) {
      reject("unknown label '" + f[2] + "'");
      continue;
    }
    try {
      SentencePair p;
      p.label = *label;
      p.a = SentenceExample::make(f[0], f.size() == 5 ? std::optional<std::string>(f[3]) : std::nullopt);
      p.b = SentenceExample::make(f[1], f.size() == 5 ? std::optional<std::string>(f[4]) : std::nullopt);
      if (p.a.tokens.empty() || p.b.tokens.empty()) {
        reject("empty sentence");
        continue;
      }
      r.pairs.push_back(std::move(p));
    } catch (const DataError& e) {
      reject(e.what());
    }
  }
  if (r.total_lines == 0) throw DataError("pair file '" + path + "' is empty");
  if (r.malformed * 10 > r.total_lines) {
    throw DataError("pair file '" + path + "': " + std::to_string(r.malformed) + " of " +
                    std::to_string(r.total_lines) + " lines malformed (first: " + r.diagnostics.front() + ")");
  }
  return r;
}

std::vector<SentenceExample> flatten_pairs(const std::vector<SentencePair>& pairs) {
  std::vector<SentenceExample> out;
  out.reserve(2 * pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (const SentenceExample* ex : {&pairs[k].a, &pairs[k].b}) {
      SentenceExample e = *ex;
      e.pair_id = k;
      e.label = pairs[k].label;
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace pvae::data
