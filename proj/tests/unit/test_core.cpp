#include <gtest/gtest.h>

#include <filesystem>

#include "canontok/canonicity.hpp"
#include "canontok/core.hpp"
#include "canontok/errors.hpp"
#include "canontok/spec_io.hpp"
#include "canontok/utf8.hpp"
#include "support/test_support.hpp"

namespace canontok {
namespace {

using testing::bpe_ab_spec;
using testing::Rng;
using testing::unigram_ab_spec;
using testing::wordpiece_ab_spec;

TEST(Utf8, RoundTripsMultibyte) {
  const std::string s = "s\xC3\xBC" "d\xE2\x82\xAC\xF0\x9F\x98\x80";
  const std::u32string u = utf8_to_u32(s);
  EXPECT_EQ(u, (std::u32string{U's', U'ü', U'd', U'€', U'\U0001F600'}));
  EXPECT_EQ(u32_to_utf8(u), s);
}

TEST(Utf8, RejectsMalformedInput) {
  EXPECT_THROW(utf8_to_u32("\xC3"), ParseError);
  EXPECT_THROW(utf8_to_u32("\xC0\xAF"), ParseError);      // overlong
  EXPECT_THROW(utf8_to_u32("\xED\xA0\x80"), ParseError);  // surrogate
  EXPECT_THROW(utf8_to_u32("\xFF"), ParseError);
}

TEST(Alphabet, RejectsDuplicates) {
  EXPECT_THROW(Alphabet({U'a', U'a'}), ValidationError);
}

TEST(Alphabet, FromTextsSortsByCodePoint) {
  const std::vector<std::u32string> texts{U"cab", U"b a"};
  EXPECT_EQ(Alphabet::from_texts(texts).chars(),
            (std::vector<char32_t>{U' ', U'a', U'b', U'c'}));
}

TEST(Vocabulary, LooksUpByContinuationFlag) {
  Vocabulary v;
  v.add(U"a");
  v.add(U"a", true);
  EXPECT_EQ(v.find(U"a", false), TokenId{0});
  EXPECT_EQ(v.find(U"a", true), TokenId{1});
  EXPECT_FALSE(v.find(U"b"));
  EXPECT_THROW(v.at(2), InvalidSequenceError);
  EXPECT_FALSE(v.has_surface_collisions());
  v.add(U"a");
  EXPECT_TRUE(v.has_surface_collisions());
  EXPECT_EQ(v.find(U"a"), TokenId{0});
}

TEST(Spec, ValidatesKindArtifacts) {
  EXPECT_NO_THROW(bpe_ab_spec().validate());
  EXPECT_NO_THROW(wordpiece_ab_spec().validate());
  EXPECT_NO_THROW(unigram_ab_spec().validate());

  auto bpe = bpe_ab_spec();
  bpe.scores = {1, 1, 1};
  EXPECT_THROW(bpe.validate(), ValidationError);

  auto uni = unigram_ab_spec();
  uni.merges.push_back({0, 1, 2});
  EXPECT_THROW(uni.validate(), ValidationError);

  uni = unigram_ab_spec();
  uni.scores[1] = 0.0;
  EXPECT_THROW(uni.validate(), ValidationError);

  auto missing_char = bpe_ab_spec();
  missing_char.alphabet = Alphabet({U'a', U'b', U'c'});
  EXPECT_THROW(missing_char.validate(), ValidationError);

  auto cont = bpe_ab_spec();
  cont.vocabulary.add(U"a", true);
  EXPECT_THROW(cont.validate(), ValidationError);
}

TEST(Decode, SingleToken) {
  const auto spec = bpe_ab_spec();
  EXPECT_EQ(decode(spec, TokenSequence{0}), U"a");
}

TEST(Decode, StripsContinuationMarker) {
  const auto spec = wordpiece_ab_spec();
  EXPECT_EQ(decode(spec, TokenSequence{2, 5}), U"abab");
}

TEST(Decode, UnknownIdIsInvalidSequence) {
  EXPECT_THROW(decode(bpe_ab_spec(), TokenSequence{0, 7}), InvalidSequenceError);
}

TEST(Decode, OffsetsPartitionText) {
  const auto spec = bpe_ab_spec();
  const auto d = decode_with_offsets(spec, TokenSequence{2, 2});
  EXPECT_EQ(d.text, U"abab");
  EXPECT_EQ(d.offsets, (std::vector<CharSpan>{{0, 2}, {2, 4}}));
  const auto one = decode_with_offsets(spec, TokenSequence{0});
  EXPECT_EQ(one.offsets, (std::vector<CharSpan>{{0, 1}}));
}

TEST(Decode, OffsetsPropertyOnRandomSequences) {
  Rng rng(7);
  const auto spec = testing::random_spec(rng, TokenizerKind::wordpiece,
                                         testing::alphabet_prefix(3), 14);
  for (int iter = 0; iter < 300; ++iter) {
    TokenSequence seq;
    const std::size_t len = testing::uniform_index(rng, 6);
    for (std::size_t i = 0; i < len; ++i) {
      seq.push_back(static_cast<TokenId>(
          testing::uniform_index(rng, spec.vocabulary.size())));
    }
    const auto d = decode_with_offsets(spec, seq);
    ASSERT_EQ(d.offsets.size(), seq.size());
    std::size_t pos = 0;
    std::u32string rebuilt;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      EXPECT_EQ(d.offsets[i].begin, pos);
      EXPECT_LT(d.offsets[i].begin, d.offsets[i].end);
      EXPECT_EQ(d.text.substr(d.offsets[i].begin,
                              d.offsets[i].end - d.offsets[i].begin),
                spec.vocabulary.at(seq[i]).surface);
      rebuilt += d.text.substr(d.offsets[i].begin,
                               d.offsets[i].end - d.offsets[i].begin);
      pos = d.offsets[i].end;
    }
    EXPECT_EQ(pos, d.text.size());
    EXPECT_EQ(rebuilt, decode(spec, seq));
  }
}

TEST(Decode, RoundTripsEncodeOnRandomStrings) {
  Rng rng(11);
  for (auto kind : {TokenizerKind::bpe, TokenizerKind::wordpiece,
                    TokenizerKind::unigram}) {
    const Tokenizer tok(
        testing::random_spec(rng, kind, testing::alphabet_prefix(3), 16));
    for (int i = 0; i < 1000 / 3 + 1; ++i) {
      const auto text = testing::random_string(rng, U"abc", 0, 12);
      const auto alpha = tok.spec().alphabet;
      if (!std::all_of(text.begin(), text.end(),
                       [&](char32_t c) { return alpha.contains(c); })) {
        continue;
      }
      EXPECT_EQ(decode(tok.spec(), encode(tok, text)), text);
    }
  }
}

TEST(SpecIo, RoundTripsEachKind) {
  for (const auto& spec : {bpe_ab_spec(), wordpiece_ab_spec(), unigram_ab_spec()}) {
    const std::string json = spec_to_json(spec);
    EXPECT_EQ(spec_from_json(json), spec);
    EXPECT_EQ(spec_to_json(spec_from_json(json)), json);
  }
}

TEST(SpecIo, RoundTripsTrainedSpecsThroughFiles) {
  Rng rng(3);
  const auto dir = std::filesystem::temp_directory_path();
  for (auto kind : {TokenizerKind::bpe, TokenizerKind::wordpiece,
                    TokenizerKind::unigram}) {
    auto spec = testing::random_spec(rng, kind, testing::alphabet_prefix(4), 20);
    spec.uses_pretokenizer = kind == TokenizerKind::unigram;
    const auto path = dir / ("canontok_spec_" + std::string(to_string(kind)) + ".json");
    save_spec(spec, path);
    const auto loaded = load_spec(path);
    EXPECT_EQ(loaded, spec);
    // Scores survive as the exact same doubles.
    for (std::size_t i = 0; i < spec.scores.size(); ++i) {
      EXPECT_EQ(loaded.scores[i], spec.scores[i]);
    }
    std::filesystem::remove(path);
  }
}

TEST(SpecIo, MergesWithUnigramKindIsValidationError) {
  std::string json = spec_to_json(unigram_ab_spec());
  json.insert(json.rfind('}'), ",\"merges\": [[0, 1, 2]]");
  EXPECT_THROW(spec_from_json(json), ValidationError);
}

TEST(SpecIo, ParseErrorsNameTheField) {
  try {
    spec_from_json(R"({"kind": "bpe", "alphabet": ["a"], "tokens": 5})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("tokens"), std::string::npos);
  }
  try {
    spec_from_json(R"({"kind": "bpe", "tokens": []})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("alphabet"), std::string::npos);
  }
  EXPECT_THROW(spec_from_json("not json"), ParseError);
  EXPECT_THROW(spec_from_json(R"({"kind": "lstm"})"), Error);
}

}  // namespace
}  // namespace canontok
