#include <gtest/gtest.h>

#include "canontok/canonicity.hpp"
#include "canontok/errors.hpp"
#include "canontok/wordpiece.hpp"
#include "support/test_support.hpp"

namespace canontok {
namespace {

using testing::Rng;

TEST(TrainWordPiece, SinglePairHandTrace) {
  const std::vector<std::u32string> corpus{U"ab"};
  const auto spec = train_wordpiece(corpus, 3);
  const auto& v = spec.vocabulary;
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v.at(0), (Token{0, U"a", false}));
  EXPECT_EQ(v.at(1), (Token{1, U"b", true}));
  EXPECT_EQ(v.at(2), (Token{2, U"ab", false}));
}

TEST(TrainWordPiece, TargetAtInitialSizeMergesNothing) {
  const std::vector<std::u32string> corpus{U"abab", U"ab"};
  const auto spec = train_wordpiece(corpus, 3);  // a, ##a, ##b
  EXPECT_EQ(spec.vocabulary.size(), 3u);
  EXPECT_THROW(train_wordpiece(corpus, 2), ValidationError);
}

TEST(TrainWordPiece, UnreachableTargetStopsEarly) {
  const std::vector<std::u32string> corpus{U"ab"};
  const auto spec = train_wordpiece(corpus, 50);
  EXPECT_EQ(spec.vocabulary.size(), 3u);
}

TEST(TrainWordPiece, ScoresPenalizeFrequentSingles) {
  // ["abab","ab"] as a=0, ##a=1, ##b=2: [0,2,1,2] and [0,2].
  const std::vector<TokenSequence> seqs{{0, 2, 1, 2}, {0, 2}};
  const std::vector<std::size_t> mult{1, 1};
  const auto ranked = rank_wordpiece_pairs(seqs, mult);
  ASSERT_EQ(ranked.size(), 3u);
  // Raw counts (what BPE ranks by): (a,##b)=2, (##b,##a)=1, (##a,##b)=1.
  // WordPiece scores: 2/(2*3), 1/(3*1), 1/(1*3), all 1/3, so the frequent
  // pair's advantage disappears and only the tie-break keeps it first.
  for (const auto& c : ranked) EXPECT_DOUBLE_EQ(c.score(), 1.0 / 3.0);
  EXPECT_EQ(ranked[0].left, 0u);
  EXPECT_EQ(ranked[0].right, 2u);
  EXPECT_EQ(ranked[0].pair_frequency, 2u);
  EXPECT_EQ(ranked[1].left, 1u);  // (##a,##b) before (##b,##a) on id order
  EXPECT_EQ(ranked[2].left, 2u);
}

TEST(TrainWordPiece, ScoreCanOverrideFrequency) {
  // (x,##y) occurs 4 times but x and ##y are common; (q,##z) occurs twice
  // among rare singles and wins on score.
  const std::vector<std::u32string> corpus{U"xy", U"xy", U"xy", U"xyy",
                                           U"xx",  U"qz", U"qz"};
  const auto spec = train_wordpiece(corpus, 6);
  const Token& merged = spec.vocabulary.tokens().back();
  EXPECT_EQ(merged.surface, U"qz");
  const auto bpe = train_bpe(corpus, 1);
  EXPECT_EQ(bpe.vocabulary.tokens().back().surface, U"xy");
}

TEST(EncodeWordPiece, GreedyLongestMatch) {
  const Tokenizer tok(testing::wordpiece_ab_spec());
  EXPECT_EQ(encode_wordpiece(tok, U"abab"), (TokenSequence{2, 5}));
  EXPECT_EQ(encode_wordpiece(tok, U"a"), (TokenSequence{0}));
  EXPECT_EQ(encode_wordpiece(tok, U"ba"), (TokenSequence{1, 3}));
}

TEST(EncodeWordPiece, ReportsUncoveredPosition) {
  const std::vector<std::u32string> corpus{U"ab"};
  const Tokenizer tok(train_wordpiece(corpus, 3));
  try {
    encode_wordpiece(tok, U"aba");  // no ##a
    FAIL() << "expected EncodingError";
  } catch (const EncodingError& e) {
    EXPECT_EQ(e.position(), 2u);
  }
}

TEST(EncodeWordPiece, MatchesGreedyEnumerationOracle) {
  Rng rng(41);
  for (int s = 0; s < 40; ++s) {
    const Tokenizer tok(
        testing::random_spec(rng, TokenizerKind::wordpiece, U"abc", 24));
    for (int i = 0; i < 40; ++i) {
      const auto text = testing::random_string(rng, U"abc", 1, 8);
      std::optional<TokenSequence> want;
      try {
        want = testing::naive_wordpiece(tok.spec(), text);
      } catch (const EncodingError&) {
      }
      if (want) {
        EXPECT_EQ(encode_wordpiece(tok, text), *want);
      } else {
        EXPECT_THROW(encode_wordpiece(tok, text), EncodingError);
      }
    }
  }
}

TEST(EncodeWordPiece, IsAFixedPoint) {
  Rng rng(43);
  for (int s = 0; s < 20; ++s) {
    const Tokenizer tok(
        testing::random_spec(rng, TokenizerKind::wordpiece, U"abc", 20));
    for (int i = 0; i < 30; ++i) {
      const auto enc = try_encode(tok, testing::random_string(rng, U"abc", 1, 9));
      if (enc) EXPECT_TRUE(is_canonical(tok, *enc));
    }
  }
}

}  // namespace
}  // namespace canontok
