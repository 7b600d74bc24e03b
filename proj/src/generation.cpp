#include "canontok/generation.hpp"

#include <exception>

#include "canontok/canonicity.hpp"

namespace canontok {

std::string_view to_string(GenerationMode mode) {
  switch (mode) {
    case GenerationMode::standard:
      return "standard";
    case GenerationMode::canonical:
      return "canonical";
    case GenerationMode::rejection:
      return "rejection";
  }
  return "?";
}

GenerationMode parse_mode(std::string_view name) {
  if (name == "standard") return GenerationMode::standard;
  if (name == "canonical") return GenerationMode::canonical;
  if (name == "rejection") return GenerationMode::rejection;
  throw ValidationError("unknown generation mode '" + std::string(name) +
                        "' (expected standard, canonical or rejection)");
}

GenerationResult generate(const Tokenizer& tokenizer,
                          const DistributionSource& source, GenerationMode mode,
                          std::span<const TokenId> prompt, std::size_t max_len,
                          std::uint64_t seed) {
  if (source.vocab_size() != tokenizer.vocab_size()) {
    throw ValidationError("source vocabulary size " +
                          std::to_string(source.vocab_size()) +
                          " does not match the tokenizer's " +
                          std::to_string(tokenizer.vocab_size()));
  }
  check_ids(tokenizer.vocabulary(), prompt);
  if (mode != GenerationMode::standard && !is_canonical(tokenizer, prompt)) {
    throw ValidationError("prompt is not canonical; constrained modes need a "
                          "canonical prompt");
  }
  GenerationResult result;
  const auto always = [](TokenId) { return true; };
  for (std::size_t step = 0; step < max_len; ++step) {
    const std::uint64_t step_seed = derive_step_seed(seed, step);
    const NextTokenDistribution d = source.next(prompt, result.tokens);
    SampleTrace trace;
    try {
      switch (mode) {
        case GenerationMode::standard:
          trace = gumbel_max_step(d.probs, always, step_seed);
          break;
        case GenerationMode::canonical:
          trace = gumbel_max_step(tokenizer, result.tokens, d, step_seed);
          break;
        case GenerationMode::rejection:
          trace = rejection_step(tokenizer, result.tokens, d, step_seed);
          break;
      }
    } catch (const DeadEndError& e) {
      throw DeadEndError(std::string(e.what()) + " (step " +
                             std::to_string(step) + ")",
                         step);
    }
    result.traces.push_back(trace);
    if (trace.token == d.eos()) {
      result.hit_eos = true;
      break;
    }
    result.tokens.push_back(trace.token);
  }
  return result;
}

std::vector<GenerationResult> generate_batch(
    const Tokenizer& tokenizer, const DistributionSource& source,
    GenerationMode mode, std::span<const TokenId> prompt, std::size_t max_len,
    std::uint64_t seed, std::size_t count, Execution execution) {
  std::vector<GenerationResult> results(count);
  if (execution == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) {
      results[i] = generate(tokenizer, source, mode, prompt, max_len, seed + i);
    }
    return results;
  }
  // Exceptions cannot leave an OpenMP region; keep the lowest-index one.
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      results[k] = generate(tokenizer, source, mode, prompt, max_len, seed + k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

namespace {

struct Enumerator {
  const Tokenizer& tokenizer;
  const DistributionSource& source;
  std::span<const TokenId> prompt;
  std::size_t max_len;
  bool canonicalized;
  SequenceDistribution out;

  void walk(TokenSequence& seq, double mass) {
    if (seq.size() == max_len) {
      out[seq] += mass;
      return;
    }
    NextTokenDistribution d = source.next(prompt, seq);
    if (canonicalized) {
      d = canonicalize_distribution(tokenizer, seq, d, Execution::serial);
    }
    const TokenId eos = d.eos();
    if (d.probs[eos] > 0.0) out[seq] += mass * d.probs[eos];
    for (TokenId t = 0; t < eos; ++t) {
      if (d.probs[t] <= 0.0) continue;
      seq.push_back(t);
      walk(seq, mass * d.probs[t]);
      seq.pop_back();
    }
  }
};

}  // namespace

SequenceDistribution enumerate_sequence_distribution(
    const Tokenizer& tokenizer, const DistributionSource& source,
    std::span<const TokenId> prompt, std::size_t max_len, bool canonicalized) {
  if (source.vocab_size() != tokenizer.vocab_size()) {
    throw ValidationError("source vocabulary size does not match tokenizer");
  }
  Enumerator e{tokenizer, source, prompt, max_len, canonicalized, {}};
  TokenSequence seq;
  e.walk(seq, 1.0);
  return std::move(e.out);
}

StringDistribution pushforward_decode(const Tokenizer& tokenizer,
                                      const SequenceDistribution& dist) {
  StringDistribution out;
  for (const auto& [seq, mass] : dist) {
    out[decode(tokenizer.spec(), seq)] += mass;
  }
  return out;
}

}  // namespace canontok
