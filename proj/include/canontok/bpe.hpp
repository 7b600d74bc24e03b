#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canontok/core.hpp"

namespace canontok {

// One application of a merge rule while encoding.
struct MergeEvent {
  std::size_t rule_index = 0;
  TokenId left = 0;
  TokenId right = 0;
  TokenId merged = 0;
  CharSpan span;  // characters covered by the merged token
  friend bool operator==(const MergeEvent&, const MergeEvent&) = default;
};

// Learns up to `num_merges` rules. Each iteration merges the most frequent
// adjacent pair (ties: smallest (left, right)); stops early once no string
// has two tokens left. Throws ValidationError on an empty corpus.
TokenizerSpec train_bpe(std::span<const std::u32string> corpus,
                        std::size_t num_merges);

// Canonical encoding: rules applied in learned order, each left to right.
// Throws EncodingError for characters outside the alphabet.
TokenSequence encode_bpe(const Tokenizer& tokenizer, std::u32string_view text);

// Same as encode_bpe, also returning every merge in the order applied.
TokenSequence encode_bpe(const Tokenizer& tokenizer, std::u32string_view text,
                         std::vector<MergeEvent>& events);

// True iff encode_bpe(decode([last, next])) == [last, next]. For a canonical
// sequence ending in `last`, this decides canonicity of the extension.
bool bpe_pair_canonical(const Tokenizer& tokenizer, TokenId last, TokenId next);

}  // namespace canontok
