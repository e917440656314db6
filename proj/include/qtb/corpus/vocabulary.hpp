#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qtb {

using TokenId = std::int32_t;

/// Lowercases ASCII, splits on whitespace and detaches trailing
/// punctuation (. , ! ? ; :) into separate tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Word-level token <-> id bijection. Ids 0..3 are reserved.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr std::array<std::string_view, 4> kSpecialTokens{"<pad>", "<bos>", "<eos>", "<UNK>"};

  Vocabulary();

  /// Assigns ids in order of first appearance across `texts`.
  static Vocabulary build(std::span<const std::string> texts);
  /// Restores a vocabulary from its id-ordered token list.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  TokenId add(const std::string& token);
  bool contains(std::string_view token) const;
  /// kUnk for unknown surface forms.
  TokenId id(std::string_view token) const;
  /// Throws IndexError for ids outside the vocabulary.
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Token ids without BOS/EOS.
  std::vector<TokenId> encode(std::string_view text) const;
  /// Space-joined surface forms; PAD/BOS/EOS are dropped, UNK renders as "<UNK>".
  std::string decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace qtb
