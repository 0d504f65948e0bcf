#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ir_agent::translator {

/// Character-level SMILES tokens; "Cl" and "Br" stay single tokens.
std::vector<std::string> tokenize_smiles(std::string_view smiles);

class TokenVocabulary {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kPad = 2;
  static constexpr int kUnk = 3;

  /// Reserved tokens only.
  TokenVocabulary();
  /// Reserved tokens followed by `tokens` (must not repeat or shadow them).
  explicit TokenVocabulary(std::vector<std::string> tokens);

  /// Reserved tokens plus every distinct token of `corpus`, sorted.
  static TokenVocabulary from_corpus(std::span<const std::string> corpus);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int id(std::string_view token) const;
  /// All tokens including the reserved ones, in id order.
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::vector<int> encode(std::string_view smiles) const;
  /// Concatenate tokens, skipping reserved ids.
  std::string decode(std::span<const int> ids) const;

  static bool is_reserved(int id) noexcept { return id >= 0 && id <= kUnk; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

}  // namespace ir_agent::translator
