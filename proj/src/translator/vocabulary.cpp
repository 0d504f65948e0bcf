#include "ir_agent/translator/vocabulary.hpp"

#include <set>

#include "ir_agent/error.hpp"

namespace ir_agent::translator {

namespace {
const std::vector<std::string> kReserved = {"<bos>", "<eos>", "<pad>", "<unk>"};
}

std::vector<std::string> tokenize_smiles(std::string_view smiles) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    if (i + 1 < smiles.size() &&
        ((smiles[i] == 'C' && smiles[i + 1] == 'l') || (smiles[i] == 'B' && smiles[i + 1] == 'r'))) {
      tokens.emplace_back(smiles.substr(i, 2));
      ++i;
    } else {
      tokens.emplace_back(1, smiles[i]);
    }
  }
  return tokens;
}

TokenVocabulary::TokenVocabulary() : TokenVocabulary(std::vector<std::string>{}) {}

TokenVocabulary::TokenVocabulary(std::vector<std::string> tokens) : tokens_(kReserved) {
  if (tokens.size() >= kReserved.size() &&
      std::equal(kReserved.begin(), kReserved.end(), tokens.begin())) {
    tokens.erase(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(kReserved.size()));
  }
  tokens_.insert(tokens_.end(), tokens.begin(), tokens.end());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw DomainError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

TokenVocabulary TokenVocabulary::from_corpus(std::span<const std::string> corpus) {
  std::set<std::string> distinct;
  for (const auto& smiles : corpus) {
    for (auto& token : tokenize_smiles(smiles)) distinct.insert(std::move(token));
  }
  return TokenVocabulary(std::vector<std::string>(distinct.begin(), distinct.end()));
}

int TokenVocabulary::id(std::string_view token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> TokenVocabulary::encode(std::string_view smiles) const {
  std::vector<int> ids;
  for (const auto& token : tokenize_smiles(smiles)) ids.push_back(id(token));
  return ids;
}

std::string TokenVocabulary::decode(std::span<const int> ids) const {
  std::string out;
  for (const int id : ids) {
    if (is_reserved(id) || id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) continue;
    out += tokens_[static_cast<std::size_t>(id)];
  }
  return out;
}

}  // namespace ir_agent::translator
