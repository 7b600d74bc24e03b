#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "canontok/core.hpp"

namespace canontok {

enum class CharClass { letter, digit, space, other };

// ASCII letters and every non-ASCII code point outside the Unicode space and
// general-punctuation ranges count as letters.
CharClass classify(char32_t c);

// A segment pattern. Pretokenization repeatedly takes the longest prefix of
// the remaining text the rule matches.
class PretokenRule {
 public:
  virtual ~PretokenRule() = default;

  // Whether `segment` is a single complete match.
  virtual bool matches(std::u32string_view segment) const = 0;

  // Length of the longest matching prefix of `rest` (at least 1 for
  // non-empty input; an unmatched single character becomes its own segment).
  virtual std::size_t match_length(std::u32string_view rest) const;
};

// Shipped rule: an optional single leading space followed by a maximal letter
// run, or a maximal digit run, or any other single character (spaces not
// followed by a letter are singletons). Closed under prefix.
class DefaultPretokenRule final : public PretokenRule {
 public:
  bool matches(std::u32string_view segment) const override;
  std::size_t match_length(std::u32string_view rest) const override;
};

const PretokenRule& default_pretoken_rule();

std::vector<std::u32string> pretokenize(std::u32string_view text);
std::vector<std::u32string> pretokenize(const PretokenRule& rule,
                                        std::u32string_view text);
// Segment boundaries as character spans.
std::vector<CharSpan> pretokenize_spans(const PretokenRule& rule,
                                        std::u32string_view text);

// Exhaustively checks, for all strings over `alphabet` of length <= max_len,
// that every prefix of a single-segment string is itself a single segment.
bool verify_closed_under_prefix(const PretokenRule& rule, std::size_t max_len,
                                const Alphabet& alphabet);

// Encodes each segment of the shipped pretokenizer independently with the
// tokenizer's base algorithm and concatenates. EncodingError messages name
// the segment index; positions are absolute.
TokenSequence encode_pretokenized(const Tokenizer& tokenizer,
                                  std::u32string_view text);

// The base algorithm alone, ignoring the pretokenizer flag.
TokenSequence encode_segment(const Tokenizer& tokenizer,
                             std::u32string_view text);

}  // namespace canontok
