#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canontok/core.hpp"

namespace canontok {

// Score of merging (left, right): freq(left|right) / (freq(left) * freq(right)),
// with frequencies taken over the current tokenized corpus.
struct WordPieceCandidate {
  TokenId left = 0;
  TokenId right = 0;
  std::size_t pair_frequency = 0;
  std::size_t left_frequency = 0;
  std::size_t right_frequency = 0;
  double score() const {
    return static_cast<double>(pair_frequency) /
           (static_cast<double>(left_frequency) *
            static_cast<double>(right_frequency));
  }
};

// Word-initial single characters first, then continuation ones, each ordered
// by code point; merges until `target_vocab_size` or until no adjacent pair
// remains. Ties on score: higher pair frequency, then smallest (left, right).
// Throws ValidationError on an empty corpus or a target below the initial size.
TokenizerSpec train_wordpiece(std::span<const std::u32string> corpus,
                              std::size_t target_vocab_size);

// Every adjacent pair of `sequences` (each weighted by its multiplicity),
// best first in the trainer's preference order.
std::vector<WordPieceCandidate> rank_wordpiece_pairs(
    std::span<const TokenSequence> sequences,
    std::span<const std::size_t> multiplicities);

// Greedy longest match from the left. Position 0 takes a word-initial token,
// later positions take continuation tokens. Throws EncodingError with the
// first position no token covers.
TokenSequence encode_wordpiece(const Tokenizer& tokenizer,
                               std::u32string_view text);

}  // namespace canontok
