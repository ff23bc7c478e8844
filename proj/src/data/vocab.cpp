#include "pvae/data/vocab.hpp"

#include <algorithm>
#include <map>

#include "pvae/errors.hpp"

namespace pvae::data {

Vocab::Vocab() {
  for (const char* s : {"<pad>", "<unk>", "<bos>", "<eos>"}) add(s);
}

void Vocab::add(const std::string& token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& corpus, std::size_t min_freq,
                   std::size_t max_size) {
  std::map<std::string, std::size_t> freq;
  for (const auto& s : corpus)
    for (const auto& t : s) ++freq[t];
  if (freq.empty()) throw DataError("cannot build a vocabulary from an empty corpus");

  std::vector<std::pair<std::string, std::size_t>> sorted(freq.begin(), freq.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocab v;
  for (const auto& [tok, count] : sorted) {
    if (max_size && v.size() >= max_size) break;
    if (count < min_freq || v.contains(tok)) continue;
    v.add(tok);
  }
  return v;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
  Vocab v;
  if (tokens.size() < kNumSpecials || !std::equal(v.tokens_.begin(), v.tokens_.end(), tokens.begin())) {
    throw DataError("vocabulary must start with the reserved tokens <pad> <unk> <bos> <eos>");
  }
  for (std::size_t i = kNumSpecials; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw DataError("duplicate vocabulary token '" + tokens[i] + "'");
    v.add(tokens[i]);
  }
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(size()));
  }
  return tokens_[id];
}

std::vector<int> Vocab::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocab::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  for (int i : ids) {
    if (i == kEos) break;
    if (i == kPad || i == kBos) continue;
    out.push_back(token(i));
  }
  return out;
}

}  // namespace pvae::data
