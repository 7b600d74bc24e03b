#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace canontok {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

enum class TokenizerKind { bpe, wordpiece, unigram };

std::string_view to_string(TokenizerKind kind);
// Throws ValidationError for unknown names.
TokenizerKind parse_kind(std::string_view name);

// Selects between the serial reference path and the OpenMP path of a kernel.
// Both must produce identical results.
enum class Execution { serial, parallel };

// Half-open character range [begin, end).
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

class Alphabet {
 public:
  Alphabet() = default;
  // Throws ValidationError on duplicates.
  explicit Alphabet(std::vector<char32_t> chars);

  // Every distinct character of `texts`, ordered by code point.
  static Alphabet from_texts(std::span<const std::u32string> texts);

  bool contains(char32_t c) const;
  const std::vector<char32_t>& chars() const { return chars_; }
  std::size_t size() const { return chars_.size(); }
  bool empty() const { return chars_.empty(); }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.chars_ == b.chars_;
  }

 private:
  std::vector<char32_t> chars_;
};

struct Token {
  TokenId id = 0;
  std::u32string surface;
  // WordPiece word-internal marker ("##"). Never part of `surface`.
  bool continuation = false;

  friend bool operator==(const Token&, const Token&) = default;
};

// Ids are dense and assigned in insertion order.
class Vocabulary {
 public:
  // Appends a token and returns its id. A second token with an identical
  // (surface, continuation) key is accepted; lookups keep resolving to the
  // first one and has_surface_collisions() reports it.
  TokenId add(std::u32string surface, bool continuation = false);

  std::optional<TokenId> find(std::u32string_view surface,
                              bool continuation = false) const;

  // Throws InvalidSequenceError for ids outside the vocabulary.
  const Token& at(TokenId id) const;
  bool contains(TokenId id) const { return id < tokens_.size(); }

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::vector<Token>& tokens() const { return tokens_; }

  std::size_t max_surface_length(bool continuation) const {
    return continuation ? max_continuation_len_ : max_initial_len_;
  }
  bool has_surface_collisions() const { return collisions_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<Token> tokens_;
  std::map<std::u32string, TokenId, std::less<>> initial_;
  std::map<std::u32string, TokenId, std::less<>> continuation_;
  std::size_t max_initial_len_ = 0;
  std::size_t max_continuation_len_ = 0;
  bool collisions_ = false;
};

// One BPE rule: rewrite the adjacent pair (left, right) as merged.
struct Merge {
  TokenId left = 0;
  TokenId right = 0;
  TokenId merged = 0;
  friend bool operator==(const Merge&, const Merge&) = default;
};

// Serializable description of a trained tokenizer.
struct TokenizerSpec {
  TokenizerKind kind = TokenizerKind::bpe;
  Alphabet alphabet;
  Vocabulary vocabulary;
  std::vector<Merge> merges;   // bpe only, in learned order
  std::vector<double> scores;  // unigram only, r(t) indexed by token id
  bool uses_pretokenizer = false;

  // Throws ValidationError naming the violated invariant.
  void validate() const;

  friend bool operator==(const TokenizerSpec&, const TokenizerSpec&) = default;
};

// A validated spec plus the lookup structures the encoders need. Immutable;
// share freely across threads.
class Tokenizer {
 public:
  explicit Tokenizer(TokenizerSpec spec);

  const TokenizerSpec& spec() const { return spec_; }
  TokenizerKind kind() const { return spec_.kind; }
  const Vocabulary& vocabulary() const { return spec_.vocabulary; }
  std::size_t vocab_size() const { return spec_.vocabulary.size(); }
  bool uses_pretokenizer() const { return spec_.uses_pretokenizer; }

  // Position of the rule rewriting (left, right), if any.
  std::optional<std::size_t> merge_rank(TokenId left, TokenId right) const;

  // Natural log of the unigram scores; empty for other kinds.
  const std::vector<double>& log_scores() const { return log_scores_; }

  // Single-character token for `c` (non-continuation), if present.
  std::optional<TokenId> char_token(char32_t c) const;

 private:
  TokenizerSpec spec_;
  std::unordered_map<std::uint64_t, std::size_t> merge_ranks_;
  std::unordered_map<char32_t, TokenId> char_tokens_;
  std::vector<double> log_scores_;
};

// Concatenated token surfaces. Throws InvalidSequenceError on unknown ids.
std::u32string decode(const TokenizerSpec& spec, std::span<const TokenId> seq);
std::string decode_utf8(const TokenizerSpec& spec, std::span<const TokenId> seq);

struct DecodedText {
  std::u32string text;
  std::vector<CharSpan> offsets;  // one per token, partitioning text
};

DecodedText decode_with_offsets(const TokenizerSpec& spec,
                                std::span<const TokenId> seq);

// Throws InvalidSequenceError if any id is outside the vocabulary.
void check_ids(const Vocabulary& vocab, std::span<const TokenId> seq);

}  // namespace canontok
