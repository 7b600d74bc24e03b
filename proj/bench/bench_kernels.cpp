// Serial reference vs OpenMP path for each parallel kernel.
// Run: ./build/bench/canontok_bench --benchmark_filter=Mask

#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "canontok/analysis.hpp"
#include "canontok/bpe.hpp"
#include "canontok/canonicity.hpp"
#include "canontok/generation.hpp"
#include "canontok/sources.hpp"
#include "canontok/unigram.hpp"
#include "canontok/utf8.hpp"

namespace {

using namespace canontok;

std::vector<std::u32string> synthetic_corpus(std::size_t lines) {
  static const char* words[] = {"the", "cat", "sat", "on", "mat", "hat",
                                "is", "flat", "bat", "and", "that", "a"};
  std::mt19937_64 rng(1);
  std::vector<std::u32string> corpus;
  for (std::size_t i = 0; i < lines; ++i) {
    std::string line;
    for (int w = 0; w < 8; ++w) {
      if (w) line += ' ';
      line += words[rng() % std::size(words)];
    }
    corpus.push_back(utf8_to_u32(line));
  }
  return corpus;
}

Execution execution(const benchmark::State& state) {
  return state.range(0) ? Execution::parallel : Execution::serial;
}

const Tokenizer& bpe_tokenizer() {
  static const Tokenizer tok(train_bpe(synthetic_corpus(200), 300));
  return tok;
}

void BM_ExtensionMask(benchmark::State& state) {
  const Tokenizer& tok = bpe_tokenizer();
  // The pair test is cheap, so use a pretokenized copy to exercise re-encoding.
  TokenizerSpec spec = tok.spec();
  spec.uses_pretokenizer = true;
  const Tokenizer pretok(spec);
  const auto seq = encode(pretok, U"the cat sat on the flat mat and that hat");
  for (auto _ : state) {
    benchmark::DoNotOptimize(canonical_extension_mask(pretok, seq, execution(state)));
  }
}
BENCHMARK(BM_ExtensionMask)->Arg(0)->Arg(1);

void BM_RemovalLoss(benchmark::State& state) {
  const auto corpus = synthetic_corpus(100);
  UnigramTrainOptions opts;
  opts.execution = Execution::serial;
  const Tokenizer tok(train_unigram(corpus, 100000, 0.5, opts));
  const std::vector<std::size_t> mult(corpus.size(), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(removal_loss_increase(
        tok.vocabulary(), tok.log_scores(), corpus, mult, execution(state)));
  }
}
BENCHMARK(BM_RemovalLoss)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

std::vector<GenerationRecord> sampled_records(const Tokenizer& tok,
                                              std::size_t count) {
  const BigramSource source = BigramSource::train(tok, synthetic_corpus(200));
  const auto runs = generate_batch(tok, source, GenerationMode::standard, {}, 24,
                                   1, count, Execution::serial);
  std::vector<GenerationRecord> records;
  for (const auto& r : runs) {
    GenerationRecord g;
    g.prompt_id = "p";
    g.text = decode_utf8(tok.spec(), r.tokens);
    g.tokens = r.tokens;
    g.token_count = r.tokens.size();
    records.push_back(std::move(g));
  }
  return records;
}

void BM_NonCanonicityRate(benchmark::State& state) {
  const Tokenizer& tok = bpe_tokenizer();
  static const auto records = sampled_records(tok, 2000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(non_canonicity_rate(tok, records, execution(state)));
  }
}
BENCHMARK(BM_NonCanonicityRate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GenerateBatch(benchmark::State& state) {
  const auto corpus = synthetic_corpus(200);
  auto tok = std::make_shared<const Tokenizer>(train_bpe(corpus, 300));
  auto base = std::make_shared<const BigramSource>(BigramSource::train(*tok, corpus));
  const PerturbedSource source(base, tok, 0.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_batch(*tok, source, GenerationMode::canonical,
                                            {}, 24, 7, 64, execution(state)));
  }
}
BENCHMARK(BM_GenerateBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
