#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canontok/core.hpp"
#include "canontok/errors.hpp"
#include "canontok/sampling.hpp"
#include "canontok/sources.hpp"

namespace canontok {

// standard: Gumbel-Max over the raw distribution. canonical: Gumbel-Max
// restricted to canonical extensions. rejection: redraw until canonical.
enum class GenerationMode { standard, canonical, rejection };

std::string_view to_string(GenerationMode mode);
// Throws ValidationError for unknown names.
GenerationMode parse_mode(std::string_view name);

struct GenerationResult {
  TokenSequence tokens;             // generated output, without the prompt
  std::vector<SampleTrace> traces;  // one per step, including the EOS step
  bool hit_eos = false;
};

// Autoregressive loop until EOS or max_len output tokens. Step i uses the
// seed derive_step_seed(seed, i), so standard and canonical runs with equal
// seeds share their noise. The prompt must be canonical unless mode is
// standard. A dead end is rethrown as DeadEndError carrying the step index.
GenerationResult generate(const Tokenizer& tokenizer,
                          const DistributionSource& source, GenerationMode mode,
                          std::span<const TokenId> prompt, std::size_t max_len,
                          std::uint64_t seed);

// Runs `count` generations with seeds seed, seed+1, ...; results are ordered
// by index whichever execution path runs them.
std::vector<GenerationResult> generate_batch(
    const Tokenizer& tokenizer, const DistributionSource& source,
    GenerationMode mode, std::span<const TokenId> prompt, std::size_t max_len,
    std::uint64_t seed, std::size_t count, Execution execution);

using SequenceDistribution = std::map<TokenSequence, double>;
using StringDistribution = std::map<std::u32string, double>;

// Probability of every complete output of at most max_len tokens under the
// autoregressive source. Outputs reaching max_len are cut there, so the
// masses sum to 1. With canonicalized set, each step uses the canonicalized
// distribution and non-canonical outputs never appear. Zero-mass outputs are
// left out. Cost grows as vocab_size^max_len.
SequenceDistribution enumerate_sequence_distribution(
    const Tokenizer& tokenizer, const DistributionSource& source,
    std::span<const TokenId> prompt, std::size_t max_len, bool canonicalized);

// Distribution of decoded strings.
StringDistribution pushforward_decode(const Tokenizer& tokenizer,
                                      const SequenceDistribution& dist);

// Sum of p ln(p/q) over the support of p, with 0 ln 0 = 0. Throws DomainError
// when q is zero where p is not.
template <typename Key>
double kl_divergence(const std::map<Key, double>& p,
                     const std::map<Key, double>& q) {
  double total = 0.0;
  for (const auto& [key, pk] : p) {
    if (pk <= 0.0) continue;
    const auto it = q.find(key);
    if (it == q.end() || it->second <= 0.0) {
      throw DomainError(
          "KL divergence undefined: q is zero where p is positive");
    }
    total += pk * std::log(pk / it->second);
  }
  return total;
}

}  // namespace canontok
