#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "canontok/core.hpp"

namespace canontok {

// The tokenizer's encoder: pretokenize-then-encode when the spec says so,
// otherwise the base algorithm. Throws EncodingError.
TokenSequence encode(const Tokenizer& tokenizer, std::u32string_view text);

// encode() with encoding failures mapped to nullopt.
std::optional<TokenSequence> try_encode(const Tokenizer& tokenizer,
                                        std::u32string_view text);

// encode(decode(seq)) == seq. A string the encoder cannot tokenize has no
// canonical tokenization, so every sequence decoding to it is non-canonical.
// The empty sequence is canonical. Throws InvalidSequenceError on bad ids.
bool is_canonical(const Tokenizer& tokenizer, std::span<const TokenId> seq);

// Decides canonicity of seq|next for a canonical `seq`, precomputing what all
// candidates share. BPE without pretokenizer uses the last-token pair test;
// pretokenized specs re-encode from the start of the last segment; other
// kinds re-encode the whole string.
class ExtensionChecker {
 public:
  ExtensionChecker(const Tokenizer& tokenizer, std::span<const TokenId> seq);

  bool operator()(TokenId next) const;

 private:
  const Tokenizer* tokenizer_;
  TokenSequence tail_;
  std::u32string tail_text_;
  bool pair_test_ = false;
};

bool extension_is_canonical(const Tokenizer& tokenizer,
                            std::span<const TokenId> seq, TokenId next);

// mask[t] != 0 iff seq|t is canonical, for every vocabulary id t.
std::vector<char> canonical_extension_mask(const Tokenizer& tokenizer,
                                           std::span<const TokenId> seq,
                                           Execution execution);

inline constexpr std::size_t kMaxEnumerationLength = 12;

// Every token sequence decoding to `text` (up to max_count), in
// lexicographic id order. Throws ValidationError for text longer than
// kMaxEnumerationLength, quoting the number of tokenizations.
std::vector<TokenSequence> enumerate_tokenizations(const Tokenizer& tokenizer,
                                                   std::u32string_view text,
                                                   std::size_t max_count);

}  // namespace canontok
