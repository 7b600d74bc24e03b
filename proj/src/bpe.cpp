#include "canontok/bpe.hpp"

#include <limits>
#include <map>

#include "canontok/errors.hpp"
#include "canontok/utf8.hpp"

namespace canontok {

namespace {

using Pair = std::pair<TokenId, TokenId>;

// Rewrites every (left, right) occurrence, scanning left to right.
void replace_pair(std::vector<TokenId>& seq, TokenId left, TokenId right,
                  TokenId merged) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
      seq[out++] = merged;
      ++i;
    } else {
      seq[out++] = seq[i];
    }
  }
  seq.resize(out);
}

std::vector<TokenId> to_char_tokens(const Tokenizer& tokenizer,
                                    std::u32string_view text) {
  std::vector<TokenId> seq;
  seq.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto id = tokenizer.char_token(text[i]);
    if (!id) {
      throw EncodingError("character " + describe_char(text[i]) +
                              " at position " + std::to_string(i) +
                              " is not in the alphabet",
                          i);
    }
    seq.push_back(*id);
  }
  return seq;
}

}  // namespace

TokenizerSpec train_bpe(std::span<const std::u32string> corpus,
                        std::size_t num_merges) {
  std::map<std::u32string, std::size_t> words;
  for (const auto& text : corpus) {
    if (!text.empty()) ++words[text];
  }
  if (words.empty()) throw ValidationError("train_bpe: corpus is empty");

  TokenizerSpec spec;
  spec.kind = TokenizerKind::bpe;
  spec.alphabet = Alphabet::from_texts(corpus);
  std::map<char32_t, TokenId> char_ids;
  for (char32_t c : spec.alphabet.chars()) {
    char_ids[c] = spec.vocabulary.add(std::u32string(1, c));
  }

  std::vector<std::pair<std::vector<TokenId>, std::size_t>> state;
  state.reserve(words.size());
  for (const auto& [text, count] : words) {
    std::vector<TokenId> seq;
    for (char32_t c : text) seq.push_back(char_ids.at(c));
    state.emplace_back(std::move(seq), count);
  }

  for (std::size_t iter = 0; iter < num_merges; ++iter) {
    std::map<Pair, std::size_t> pair_counts;
    for (const auto& [seq, count] : state) {
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        pair_counts[{seq[i], seq[i + 1]}] += count;
      }
    }
    // Map order makes the first strict maximum the smallest pair.
    const Pair* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count) {
        best = &pair;
        best_count = count;
      }
    }
    if (best == nullptr) break;

    const auto [left, right] = *best;
    const TokenId merged = spec.vocabulary.add(
        spec.vocabulary.at(left).surface + spec.vocabulary.at(right).surface);
    spec.merges.push_back(Merge{left, right, merged});
    for (auto& entry : state) replace_pair(entry.first, left, right, merged);
  }
  return spec;
}

TokenSequence encode_bpe(const Tokenizer& tokenizer, std::u32string_view text,
                         std::vector<MergeEvent>& events) {
  events.clear();
  std::vector<TokenId> seq = to_char_tokens(tokenizer, text);
  std::vector<CharSpan> spans;
  spans.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) spans.push_back({i, i + 1});

  // Rules fire in rank order. A rule can never re-enable an earlier one
  // because its merged token is newer than every earlier rule's operands.
  while (seq.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      if (const auto rank = tokenizer.merge_rank(seq[i], seq[i + 1])) {
        best_rank = std::min(best_rank, *rank);
      }
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;

    const Merge& rule = tokenizer.spec().merges[best_rank];
    std::size_t out = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i + 1 < seq.size() && seq[i] == rule.left &&
          seq[i + 1] == rule.right) {
        const CharSpan span{spans[i].begin, spans[i + 1].end};
        events.push_back({best_rank, rule.left, rule.right, rule.merged, span});
        seq[out] = rule.merged;
        spans[out] = span;
        ++out;
        ++i;
      } else {
        seq[out] = seq[i];
        spans[out] = spans[i];
        ++out;
      }
    }
    seq.resize(out);
    spans.resize(out);
  }
  return seq;
}

TokenSequence encode_bpe(const Tokenizer& tokenizer, std::u32string_view text) {
  std::vector<MergeEvent> events;
  return encode_bpe(tokenizer, text, events);
}

bool bpe_pair_canonical(const Tokenizer& tokenizer, TokenId last,
                        TokenId next) {
  const auto& vocab = tokenizer.vocabulary();
  const std::u32string text = vocab.at(last).surface + vocab.at(next).surface;
  const TokenSequence encoded = encode_bpe(tokenizer, text);
  return encoded.size() == 2 && encoded[0] == last && encoded[1] == next;
}

}  // namespace canontok
