#include "canontok/pretok.hpp"

#include <functional>

#include "canontok/bpe.hpp"
#include "canontok/errors.hpp"
#include "canontok/unigram.hpp"
#include "canontok/wordpiece.hpp"

namespace canontok {

CharClass classify(char32_t c) {
  if (c < 0x80) {
    if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) {
      return CharClass::letter;
    }
    if (c >= U'0' && c <= U'9') return CharClass::digit;
    if (c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
        c == U'\v') {
      return CharClass::space;
    }
    return CharClass::other;
  }
  if (c == 0x85 || c == 0xA0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) ||
      c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
      c == 0x3000) {
    return CharClass::space;
  }
  if ((c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
      (c >= 0x80 && c <= 0xBF) || c == 0xD7 || c == 0xF7) {
    return CharClass::other;
  }
  return CharClass::letter;
}

std::size_t PretokenRule::match_length(std::u32string_view rest) const {
  for (std::size_t len = rest.size(); len > 1; --len) {
    if (matches(rest.substr(0, len))) return len;
  }
  return rest.empty() ? 0 : 1;
}

bool DefaultPretokenRule::matches(std::u32string_view segment) const {
  if (segment.empty()) return false;
  return match_length(segment) == segment.size();
}

std::size_t DefaultPretokenRule::match_length(std::u32string_view rest) const {
  if (rest.empty()) return 0;
  auto run = [&](std::size_t from, CharClass cls) {
    std::size_t end = from;
    while (end < rest.size() && classify(rest[end]) == cls) ++end;
    return end;
  };
  switch (classify(rest[0])) {
    case CharClass::letter:
      return run(0, CharClass::letter);
    case CharClass::digit:
      return run(0, CharClass::digit);
    case CharClass::space:
      if (rest[0] == U' ' && rest.size() > 1 &&
          classify(rest[1]) == CharClass::letter) {
        return run(1, CharClass::letter);
      }
      return 1;
    case CharClass::other:
      return 1;
  }
  return 1;
}

const PretokenRule& default_pretoken_rule() {
  static const DefaultPretokenRule rule;
  return rule;
}

std::vector<CharSpan> pretokenize_spans(const PretokenRule& rule,
                                        std::u32string_view text) {
  std::vector<CharSpan> spans;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t len = rule.match_length(text.substr(pos));
    spans.push_back({pos, pos + len});
    pos += len;
  }
  return spans;
}

std::vector<std::u32string> pretokenize(const PretokenRule& rule,
                                        std::u32string_view text) {
  std::vector<std::u32string> out;
  for (const CharSpan& s : pretokenize_spans(rule, text)) {
    out.emplace_back(text.substr(s.begin, s.end - s.begin));
  }
  return out;
}

std::vector<std::u32string> pretokenize(std::u32string_view text) {
  return pretokenize(default_pretoken_rule(), text);
}

bool verify_closed_under_prefix(const PretokenRule& rule, std::size_t max_len,
                                const Alphabet& alphabet) {
  auto single_segment = [&](std::u32string_view s) {
    return rule.match_length(s) == s.size();
  };
  std::u32string current;
  // Depth-first over every string of length 1..max_len.
  std::function<bool()> visit = [&]() -> bool {
    if (current.size() == max_len) return true;
    for (char32_t c : alphabet.chars()) {
      current.push_back(c);
      bool ok = true;
      if (single_segment(current)) {
        for (std::size_t len = 1; len < current.size() && ok; ++len) {
          ok = single_segment(std::u32string_view(current).substr(0, len));
        }
      }
      if (ok) ok = visit();
      current.pop_back();
      if (!ok) return false;
    }
    return true;
  };
  return visit();
}

TokenSequence encode_segment(const Tokenizer& tokenizer,
                             std::u32string_view text) {
  switch (tokenizer.kind()) {
    case TokenizerKind::bpe:
      return encode_bpe(tokenizer, text);
    case TokenizerKind::wordpiece:
      return encode_wordpiece(tokenizer, text);
    case TokenizerKind::unigram:
      return encode_unigram(tokenizer, text);
  }
  throw ValidationError("unknown tokenizer kind");
}

TokenSequence encode_pretokenized(const Tokenizer& tokenizer,
                                  std::u32string_view text) {
  TokenSequence out;
  const auto spans = pretokenize_spans(default_pretoken_rule(), text);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto segment =
        text.substr(spans[i].begin, spans[i].end - spans[i].begin);
    try {
      const TokenSequence part = encode_segment(tokenizer, segment);
      out.insert(out.end(), part.begin(), part.end());
    } catch (const EncodingError& e) {
      throw EncodingError("segment " + std::to_string(i) + ": " + e.what(),
                          spans[i].begin + e.position());
    }
  }
  return out;
}

}  // namespace canontok
