#include "canontok/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "canontok/errors.hpp"
#include "canontok/utf8.hpp"

namespace canontok {

namespace {

std::uint64_t pair_key(TokenId left, TokenId right) {
  return (static_cast<std::uint64_t>(left) << 32) | right;
}

}  // namespace

std::string_view to_string(TokenizerKind kind) {
  switch (kind) {
    case TokenizerKind::bpe:
      return "bpe";
    case TokenizerKind::wordpiece:
      return "wordpiece";
    case TokenizerKind::unigram:
      return "unigram";
  }
  return "unknown";
}

TokenizerKind parse_kind(std::string_view name) {
  if (name == "bpe") return TokenizerKind::bpe;
  if (name == "wordpiece") return TokenizerKind::wordpiece;
  if (name == "unigram") return TokenizerKind::unigram;
  throw ValidationError("unknown tokenizer kind '" + std::string(name) + "'");
}

Alphabet::Alphabet(std::vector<char32_t> chars) : chars_(std::move(chars)) {
  std::set<char32_t> seen;
  for (char32_t c : chars_) {
    if (!seen.insert(c).second) {
      throw ValidationError("alphabet: duplicate character " + describe_char(c));
    }
  }
}

Alphabet Alphabet::from_texts(std::span<const std::u32string> texts) {
  std::set<char32_t> seen;
  for (const auto& text : texts) seen.insert(text.begin(), text.end());
  return Alphabet(std::vector<char32_t>(seen.begin(), seen.end()));
}

bool Alphabet::contains(char32_t c) const {
  return std::find(chars_.begin(), chars_.end(), c) != chars_.end();
}

TokenId Vocabulary::add(std::u32string surface, bool continuation) {
  const auto id = static_cast<TokenId>(tokens_.size());
  auto& index = continuation ? continuation_ : initial_;
  if (!index.emplace(surface, id).second) collisions_ = true;
  auto& max_len = continuation ? max_continuation_len_ : max_initial_len_;
  max_len = std::max(max_len, surface.size());
  tokens_.push_back(Token{id, std::move(surface), continuation});
  return id;
}

std::optional<TokenId> Vocabulary::find(std::u32string_view surface,
                                        bool continuation) const {
  const auto& index = continuation ? continuation_ : initial_;
  const auto it = index.find(surface);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

const Token& Vocabulary::at(TokenId id) const {
  if (id >= tokens_.size()) {
    throw InvalidSequenceError("unknown token id " + std::to_string(id) +
                               " (vocabulary size " +
                               std::to_string(tokens_.size()) + ")");
  }
  return tokens_[id];
}

void TokenizerSpec::validate() const {
  if (alphabet.empty()) throw ValidationError("alphabet: must be non-empty");
  if (vocabulary.empty()) throw ValidationError("tokens: must be non-empty");

  for (const Token& token : vocabulary.tokens()) {
    if (token.surface.empty()) {
      throw ValidationError("tokens[" + std::to_string(token.id) +
                            "].surface: must be non-empty");
    }
    for (char32_t c : token.surface) {
      if (!alphabet.contains(c)) {
        throw ValidationError("tokens[" + std::to_string(token.id) +
                              "].surface: character " + describe_char(c) +
                              " not in alphabet");
      }
    }
    if (token.continuation && kind != TokenizerKind::wordpiece) {
      throw ValidationError("tokens[" + std::to_string(token.id) +
                            "].continuation: only wordpiece tokens may be "
                            "continuation tokens");
    }
  }
  for (char32_t c : alphabet.chars()) {
    const std::u32string single(1, c);
    if (!vocabulary.find(single, false) && !vocabulary.find(single, true)) {
      throw ValidationError("tokens: no single-character token for " +
                            describe_char(c));
    }
  }

  if (kind != TokenizerKind::bpe && !merges.empty()) {
    throw ValidationError("merges: present but kind is " +
                          std::string(to_string(kind)));
  }
  if (kind != TokenizerKind::unigram && !scores.empty()) {
    throw ValidationError("scores: present but kind is " +
                          std::string(to_string(kind)));
  }

  if (kind == TokenizerKind::bpe) {
    if (vocabulary.size() != alphabet.size() + merges.size()) {
      throw ValidationError(
          "merges: bpe vocabulary size must equal alphabet size plus merge "
          "count");
    }
    std::unordered_set<std::uint64_t> pairs;
    std::unordered_set<TokenId> produced;
    for (std::size_t i = 0; i < merges.size(); ++i) {
      const Merge& m = merges[i];
      const std::string where = "merges[" + std::to_string(i) + "]";
      if (!vocabulary.contains(m.left) || !vocabulary.contains(m.right) ||
          !vocabulary.contains(m.merged)) {
        throw ValidationError(where + ": token id out of range");
      }
      if (vocabulary.at(m.merged).surface !=
          vocabulary.at(m.left).surface + vocabulary.at(m.right).surface) {
        throw ValidationError(where +
                              ": merged surface is not left + right surface");
      }
      if (!pairs.insert(pair_key(m.left, m.right)).second) {
        throw ValidationError(where + ": duplicate rule for the same pair");
      }
      if (!produced.insert(m.merged).second) {
        throw ValidationError(where + ": merged token produced twice");
      }
      // A rule may only use tokens that exist before it fires.
      if (m.left >= m.merged || m.right >= m.merged) {
        throw ValidationError(where + ": operands must precede merged token");
      }
    }
  }

  if (kind == TokenizerKind::unigram) {
    if (scores.size() != vocabulary.size()) {
      throw ValidationError("scores: expected one score per token");
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!std::isfinite(scores[i]) || scores[i] <= 0.0) {
        throw ValidationError("scores[" + std::to_string(i) +
                              "]: must be positive and finite");
      }
    }
  }
}

Tokenizer::Tokenizer(TokenizerSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  merge_ranks_.reserve(spec_.merges.size());
  for (std::size_t i = 0; i < spec_.merges.size(); ++i) {
    merge_ranks_.emplace(pair_key(spec_.merges[i].left, spec_.merges[i].right),
                         i);
  }
  for (const Token& token : spec_.vocabulary.tokens()) {
    if (token.surface.size() == 1 && !token.continuation) {
      char_tokens_.emplace(token.surface[0], token.id);
    }
  }
  log_scores_.reserve(spec_.scores.size());
  for (double s : spec_.scores) log_scores_.push_back(std::log(s));
}

std::optional<std::size_t> Tokenizer::merge_rank(TokenId left,
                                                 TokenId right) const {
  const auto it = merge_ranks_.find(pair_key(left, right));
  if (it == merge_ranks_.end()) return std::nullopt;
  return it->second;
}

std::optional<TokenId> Tokenizer::char_token(char32_t c) const {
  const auto it = char_tokens_.find(c);
  if (it == char_tokens_.end()) return std::nullopt;
  return it->second;
}

void check_ids(const Vocabulary& vocab, std::span<const TokenId> seq) {
  for (TokenId id : seq) (void)vocab.at(id);
}

std::u32string decode(const TokenizerSpec& spec, std::span<const TokenId> seq) {
  std::u32string out;
  for (TokenId id : seq) out += spec.vocabulary.at(id).surface;
  return out;
}

std::string decode_utf8(const TokenizerSpec& spec,
                        std::span<const TokenId> seq) {
  return u32_to_utf8(decode(spec, seq));
}

DecodedText decode_with_offsets(const TokenizerSpec& spec,
                                std::span<const TokenId> seq) {
  DecodedText out;
  out.offsets.reserve(seq.size());
  for (TokenId id : seq) {
    const auto& surface = spec.vocabulary.at(id).surface;
    const std::size_t begin = out.text.size();
    out.text += surface;
    out.offsets.push_back(CharSpan{begin, out.text.size()});
  }
  return out;
}

}  // namespace canontok
