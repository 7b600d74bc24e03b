#include <gtest/gtest.h>

#include "canontok/canonicity.hpp"
#include "canontok/errors.hpp"
#include "canontok/pretok.hpp"
#include "support/test_support.hpp"

namespace canontok {
namespace {

using testing::Rng;
using Segments = std::vector<std::u32string>;

TEST(Pretokenize, Examples) {
  EXPECT_EQ(pretokenize(U" hello world"), (Segments{U" hello", U" world"}));
  EXPECT_EQ(pretokenize(U""), Segments{});
  EXPECT_EQ(pretokenize(U"a1"), (Segments{U"a", U"1"}));
  EXPECT_EQ(pretokenize(U"ab, 12cd"),
            (Segments{U"ab", U",", U" ", U"12", U"cd"}));
  EXPECT_EQ(pretokenize(U"  x"), (Segments{U" ", U" x"}));
  EXPECT_EQ(pretokenize(U"Fluss im südöstlichen"),
            (Segments{U"Fluss", U" im", U" südöstlichen"}));
}

TEST(Pretokenize, Classes) {
  EXPECT_EQ(classify(U'q'), CharClass::letter);
  EXPECT_EQ(classify(U'ß'), CharClass::letter);
  EXPECT_EQ(classify(U'7'), CharClass::digit);
  EXPECT_EQ(classify(U'\t'), CharClass::space);
  EXPECT_EQ(classify(U' '), CharClass::space);
  EXPECT_EQ(classify(U'.'), CharClass::other);
  EXPECT_EQ(classify(U'\u2014'), CharClass::other);
}

TEST(Pretokenize, DefaultRuleIsClosedUnderPrefix) {
  const Alphabet alpha({U'a', U' ', U'1', U'.'});
  EXPECT_TRUE(verify_closed_under_prefix(default_pretoken_rule(), 5, alpha));
}

// Segments are a letter run with one trailing digit, e.g. "ab1". "ab" alone
// is not a segment although it is a prefix of one.
class TrailingDigitRule final : public PretokenRule {
 public:
  bool matches(std::u32string_view s) const override {
    if (s.size() < 2 || classify(s.back()) != CharClass::digit) return false;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      if (classify(s[i]) != CharClass::letter) return false;
    }
    return true;
  }
};

TEST(Pretokenize, AdversarialRuleIsNotClosed) {
  const TrailingDigitRule rule;
  EXPECT_EQ(pretokenize(rule, U"ab1c"), (Segments{U"ab1", U"c"}));
  const Alphabet alpha({U'a', U'b', U'1'});
  EXPECT_FALSE(verify_closed_under_prefix(rule, 3, alpha));
  // Length-1 prefixes are always single segments, so short checks pass.
  EXPECT_TRUE(verify_closed_under_prefix(rule, 2, alpha));
}

TEST(Pretokenize, MaxLenOneIsTriviallyClosed) {
  const TrailingDigitRule rule;
  EXPECT_TRUE(verify_closed_under_prefix(rule, 1, Alphabet({U'a', U'1'})));
}

TEST(Pretokenize, IsLosslessAndIdempotent) {
  Rng rng(71);
  for (int i = 0; i < 500; ++i) {
    const auto text = testing::random_string(rng, U"ab 1.", 0, 14);
    const auto segs = pretokenize(text);
    std::u32string joined;
    for (const auto& s : segs) {
      EXPECT_FALSE(s.empty());
      joined += s;
      EXPECT_EQ(pretokenize(s), Segments{s});
    }
    EXPECT_EQ(joined, text);
    const auto spans = pretokenize_spans(default_pretoken_rule(), text);
    ASSERT_EQ(spans.size(), segs.size());
  }
}

TokenizerSpec cross_boundary_spec() {
  TokenizerSpec spec;
  spec.kind = TokenizerKind::bpe;
  spec.alphabet = Alphabet({U'1', U'a'});
  spec.vocabulary.add(U"1");   // 0
  spec.vocabulary.add(U"a");   // 1
  spec.vocabulary.add(U"a1");  // 2
  spec.merges.push_back({1, 0, 2});
  spec.uses_pretokenizer = true;
  return spec;
}

TEST(EncodePretokenized, MergesNeverCrossSegments) {
  const Tokenizer tok(cross_boundary_spec());
  EXPECT_EQ(encode(tok, U"a1"), (TokenSequence{1, 0}));
  EXPECT_EQ(encode_segment(tok, U"a1"), (TokenSequence{2}));
  EXPECT_FALSE(is_canonical(tok, TokenSequence{2}));
  EXPECT_TRUE(is_canonical(tok, TokenSequence{1, 0}));
}

TEST(EncodePretokenized, ErrorPositionIsAbsolute) {
  const Tokenizer tok(cross_boundary_spec());
  try {
    encode(tok, U"a1 a");  // ' ' is outside the alphabet
    FAIL() << "expected EncodingError";
  } catch (const EncodingError& e) {
    EXPECT_EQ(e.position(), 2u);
    EXPECT_NE(std::string(e.what()).find("segment"), std::string::npos);
  }
}

TEST(EncodePretokenized, EqualsSegmentwiseEncoding) {
  Rng rng(73);
  for (auto kind : {TokenizerKind::bpe, TokenizerKind::wordpiece,
                    TokenizerKind::unigram}) {
    for (int s = 0; s < 5; ++s) {
      const Tokenizer tok(testing::random_spec(rng, kind, U"ab 1", 18, true));
      for (int i = 0; i < 40; ++i) {
        const auto text = testing::random_string(rng, U"ab 1", 1, 10);
        const auto enc = try_encode(tok, text);
        if (!enc) continue;
        TokenSequence want;
        for (const auto& seg : pretokenize(text)) {
          const auto part = encode_segment(tok, seg);
          want.insert(want.end(), part.begin(), part.end());
        }
        EXPECT_EQ(*enc, want);
        EXPECT_EQ(decode(tok.spec(), *enc), text);
      }
    }
  }
}

}  // namespace
}  // namespace canontok
