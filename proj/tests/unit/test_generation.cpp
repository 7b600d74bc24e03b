#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "canontok/canonicity.hpp"
#include "canontok/errors.hpp"
#include "canontok/generation.hpp"
#include "canontok/sources.hpp"
#include "canontok/utf8.hpp"
#include "support/test_support.hpp"

namespace canontok {
namespace {

using testing::Rng;

std::vector<std::u32string> toy_corpus() {
  std::ifstream in(std::string(CANONTOK_FIXTURES) + "/toy_corpus.txt");
  std::vector<std::u32string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(utf8_to_u32(line));
  }
  return lines;
}

double sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

TEST(Bigram, HandCounts) {
  BigramSource src(2, 1.0);
  src.add_count(2, 0, 3.0);  // begin -> token 0
  const auto d = src.next({}, {});
  ASSERT_EQ(d.probs.size(), 3u);
  EXPECT_DOUBLE_EQ(d.probs[0], 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(d.probs[1], 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(d.probs[2], 1.0 / 6.0);
  // Unseen row is uniform.
  const TokenSequence out{1};
  const auto u = src.next({}, out);
  for (double p : u.probs) EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
}

TEST(Bigram, TrainedHasFullSupportAndRoundTrips) {
  const auto corpus = toy_corpus();
  ASSERT_FALSE(corpus.empty());
  auto tok = std::make_shared<const Tokenizer>(train_bpe(corpus, 20));
  const auto src = BigramSource::train(*tok, corpus);
  const auto again = source_from_text(src.to_json(), tok);
  Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    TokenSequence out;
    for (std::size_t j = 0; j < testing::uniform_index(rng, 4); ++j) {
      out.push_back(static_cast<TokenId>(testing::uniform_index(rng, tok->vocab_size())));
    }
    const auto d = src.next({}, out);
    EXPECT_NO_THROW(d.validate());
    for (double p : d.probs) EXPECT_GT(p, 0.0);
    EXPECT_EQ(again->next({}, out).probs, d.probs);
  }
}

TEST(Table, LooksUpExactContext) {
  const auto t = TableSource::from_jsonl(
      "{\"context\": [], \"probs\": [0.5, 0.5, 0.0]}\n"
      "{\"context\": [0], \"probs\": [0.0, 0.25, 0.75]}\n",
      2);
  const TokenSequence zero{0};
  EXPECT_EQ(t.next({}, zero).probs, (std::vector<double>{0.0, 0.25, 0.75}));
  EXPECT_EQ(t.next(zero, {}).probs, (std::vector<double>{0.0, 0.25, 0.75}));
  const TokenSequence one{1};
  EXPECT_THROW(t.next({}, one), ValidationError);
}

TEST(Table, ParseErrorsNameTheLine) {
  try {
    TableSource::from_jsonl("{\"context\": [], \"probs\": [1.0, 0.0]}\n{oops}\n", 1);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(TableSource::from_jsonl("{\"context\": [], \"probs\": [0.7, 0.7]}", 1),
               ValidationError);
}

TEST(Perturbed, MovesMassOntoNonCanonicalTokens) {
  auto tok = std::make_shared<const Tokenizer>(testing::bpe_ab_spec());
  auto base = std::make_shared<TableSource>(3);
  base->add({}, {0.25, 0.25, 0.25, 0.25});
  base->add({0}, {0.25, 0.25, 0.25, 0.25});
  const PerturbedSource p(base, tok, 0.2);
  // After [a] only b is non-canonical.
  const TokenSequence a{0};
  const auto d = p.next({}, a);
  EXPECT_DOUBLE_EQ(d.probs[1], 0.8 * 0.25 + 0.2);
  EXPECT_DOUBLE_EQ(d.probs[0], 0.8 * 0.25);
  EXPECT_NEAR(sum(d.probs), 1.0, 1e-12);
  // Nothing is non-canonical after the empty output.
  EXPECT_EQ(p.next({}, {}).probs, base->next({}, {}).probs);
  const auto again = source_from_text(p.to_json(), tok);
  EXPECT_EQ(again->next({}, a).probs, d.probs);
}

TEST(Modes, ParseAndPrint) {
  for (auto m : {GenerationMode::standard, GenerationMode::canonical,
                 GenerationMode::rejection}) {
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_mode("greedy"), ValidationError);
}

struct Setup {
  std::shared_ptr<const Tokenizer> tok;
  std::shared_ptr<const DistributionSource> source;
};

Setup toy_setup(double epsilon) {
  const auto corpus = toy_corpus();
  auto tok = std::make_shared<const Tokenizer>(train_bpe(corpus, 30));
  auto base = std::make_shared<const BigramSource>(BigramSource::train(*tok, corpus));
  return {tok, std::make_shared<const PerturbedSource>(base, tok, epsilon)};
}

TEST(Generate, ConstrainedModesOnlyEmitCanonicalSequences) {
  const auto s = toy_setup(0.3);
  for (auto mode : {GenerationMode::canonical, GenerationMode::rejection}) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const auto r = generate(*s.tok, *s.source, mode, {}, 16, seed);
      EXPECT_TRUE(is_canonical(*s.tok, r.tokens));
      EXPECT_EQ(r.traces.size(), r.tokens.size() + (r.hit_eos ? 1 : 0));
    }
  }
}

TEST(Generate, StandardModeProducesNonCanonicalOutputs) {
  const auto s = toy_setup(0.3);
  int non_canonical = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto r = generate(*s.tok, *s.source, GenerationMode::standard, {}, 16, seed);
    non_canonical += !is_canonical(*s.tok, r.tokens);
    for (const auto& tr : r.traces) EXPECT_EQ(tr.evaluations, 1u);
  }
  EXPECT_GT(non_canonical, 0);
}

TEST(Generate, PairedRunsAgreeWhenStandardIsCanonical) {
  const auto s = toy_setup(0.1);
  int agreed = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto std_run =
        generate(*s.tok, *s.source, GenerationMode::standard, {}, 12, seed);
    const auto can_run =
        generate(*s.tok, *s.source, GenerationMode::canonical, {}, 12, seed);
    if (is_canonical(*s.tok, std_run.tokens)) {
      EXPECT_EQ(std_run.tokens, can_run.tokens);
      ++agreed;
    }
  }
  EXPECT_GT(agreed, 0);
}

TEST(Generate, DeadEndReportsTheStep) {
  const Tokenizer tok(testing::bpe_ab_spec());
  TableSource t(3);
  t.add({}, {1.0, 0.0, 0.0, 0.0});
  t.add({0}, {0.0, 1.0, 0.0, 0.0});  // only [a, b] left, never canonical
  try {
    generate(tok, t, GenerationMode::canonical, {}, 5, 1);
    FAIL() << "expected DeadEndError";
  } catch (const DeadEndError& e) {
    EXPECT_EQ(e.step(), 1u);
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos);
  }
  const auto r = generate(tok, t, GenerationMode::standard, {}, 2, 1);
  EXPECT_EQ(r.tokens, (TokenSequence{0, 1}));
  EXPECT_FALSE(r.hit_eos);
}

TEST(Generate, RejectsBadPrompts) {
  const Tokenizer tok(testing::bpe_ab_spec());
  const testing::HashedSource src(3, 1);
  const TokenSequence bad{0, 1};
  EXPECT_THROW(generate(tok, src, GenerationMode::canonical, bad, 3, 1),
               ValidationError);
  EXPECT_NO_THROW(generate(tok, src, GenerationMode::standard, bad, 3, 1));
  const TokenSequence unknown{7};
  EXPECT_THROW(generate(tok, src, GenerationMode::standard, unknown, 3, 1),
               InvalidSequenceError);
  const testing::HashedSource wrong(5, 1);
  EXPECT_THROW(generate(tok, wrong, GenerationMode::standard, {}, 3, 1),
               ValidationError);
}

TEST(Generate, BatchSerialEqualsParallel) {
  const auto s = toy_setup(0.2);
  for (auto mode : {GenerationMode::standard, GenerationMode::canonical,
                    GenerationMode::rejection}) {
    const auto a = generate_batch(*s.tok, *s.source, mode, {}, 10, 40, 16,
                                  Execution::serial);
    const auto b = generate_batch(*s.tok, *s.source, mode, {}, 10, 40, 16,
                                  Execution::parallel);
    ASSERT_EQ(a.size(), 16u);
    ASSERT_EQ(b.size(), 16u);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].tokens, b[i].tokens);
      EXPECT_EQ(a[i].tokens,
                generate(*s.tok, *s.source, mode, {}, 10, 40 + i).tokens);
    }
  }
}

TEST(Enumerate, MassesSumToOneAndCanonicalizedIsCanonical) {
  const Tokenizer tok(testing::bpe_ab_spec());
  const testing::HashedSource src(3, 9);
  const auto d = enumerate_sequence_distribution(tok, src, {}, 4, false);
  const auto c = enumerate_sequence_distribution(tok, src, {}, 4, true);
  double td = 0.0, tc = 0.0;
  for (const auto& [seq, p] : d) td += p;
  for (const auto& [seq, p] : c) {
    tc += p;
    EXPECT_TRUE(is_canonical(tok, seq));
  }
  EXPECT_NEAR(td, 1.0, 1e-12);
  EXPECT_NEAR(tc, 1.0, 1e-12);
  EXPECT_TRUE(d.count(TokenSequence{}));
  // 1 + 3 + 9 + 27 + 81 sequences, all with positive mass.
  EXPECT_EQ(d.size(), 121u);
  const auto strings = pushforward_decode(tok, d);
  double ts = 0.0;
  for (const auto& [text, p] : strings) ts += p;
  EXPECT_NEAR(ts, 1.0, 1e-12);
  EXPECT_LT(strings.size(), d.size());
}

TEST(Kl, Examples) {
  using M = std::map<int, double>;
  EXPECT_NEAR(kl_divergence(M{{0, 1.0}}, M{{0, 0.5}, {1, 0.5}}), std::log(2.0), 1e-15);
  EXPECT_EQ(kl_divergence(M{{0, 0.5}, {1, 0.5}}, M{{0, 0.5}, {1, 0.5}}), 0.0);
  EXPECT_EQ(kl_divergence(M{{0, 1.0}, {1, 0.0}}, M{{0, 1.0}}), 0.0);
  EXPECT_THROW(kl_divergence(M{{0, 0.5}, {1, 0.5}}, M{{0, 1.0}}), DomainError);
}

}  // namespace
}  // namespace canontok
