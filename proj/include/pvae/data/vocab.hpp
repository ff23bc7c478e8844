#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace pvae::data {

/// Token <-> id bijection with fixed reserved ids.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr std::size_t kNumSpecials = 4;

  Vocab();

  /// Frequency-sorted (ties lexicographic). Tokens seen fewer than `min_freq`
  /// times are left out and encode to UNK. `max_size` counts the specials;
  /// 0 means unlimited. Throws DataError on an empty corpus.
  static Vocab build(const std::vector<std::vector<std::string>>& corpus, std::size_t min_freq = 1,
                     std::size_t max_size = 0);

  /// Restores a vocabulary from its full token list (specials first).
  static Vocab from_tokens(const std::vector<std::string>& tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  int id(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  /// Decodes ids, stopping at EOS and skipping PAD/BOS.
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  static bool is_special(int id) noexcept { return id >= 0 && id < static_cast<int>(kNumSpecials); }

 private:
  void add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace pvae::data
