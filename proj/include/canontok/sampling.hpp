#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "canontok/core.hpp"

namespace canontok {

inline constexpr double kDistributionSumTolerance = 1e-9;

// Probabilities over vocabulary ids 0..n-1 followed by end-of-sequence at
// index n.
struct NextTokenDistribution {
  std::vector<double> probs;
  TokenSequence context;

  std::size_t vocab_size() const { return probs.empty() ? 0 : probs.size() - 1; }
  TokenId eos() const { return static_cast<TokenId>(vocab_size()); }

  // Throws ValidationError for negative entries or a sum off by more than
  // kDistributionSumTolerance.
  void validate() const;
};

struct SampleTrace {
  TokenId token = 0;
  std::size_t evaluations = 0;  // canonicity checks performed, >= 1
  std::uint64_t step_seed = 0;
};

// Counter-based randomness. Every draw is a pure function of (seed, counter),
// so paired runs see identical noise per token regardless of what else they
// evaluate.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_step_seed(std::uint64_t run_seed, std::uint64_t step);
// Maps 64 random bits to a double in the open interval (0, 1).
double uniform_open01(std::uint64_t bits);
// Standard Gumbel(0, 1) noise for `token` at a step.
double gumbel_noise(std::uint64_t step_seed, TokenId token);

// Decides whether the current sequence may be extended by a vocabulary id.
// Never called with the EOS id, which is always allowed.
using ExtensionPredicate = std::function<bool(TokenId)>;

// Zeroes vocabulary entries with mask[t] == 0 and rescales the rest
// proportionally. Throws DeadEndError when no allowed entry has mass.
NextTokenDistribution canonicalize_distribution(const NextTokenDistribution& d,
                                                std::span<const char> mask);

// Same, with the mask computed from canonicity of seq|t.
NextTokenDistribution canonicalize_distribution(
    const Tokenizer& tokenizer, std::span<const TokenId> seq,
    const NextTokenDistribution& d, Execution execution = Execution::parallel);

// Visits ids in decreasing log(probs[t]) + gumbels[t] and returns the first
// allowed one. Zero-probability ids are never visited. Throws DeadEndError
// when every positive-mass id is rejected.
SampleTrace gumbel_max_select(std::span<const double> probs,
                              std::span<const double> gumbels,
                              const ExtensionPredicate& allowed);

SampleTrace gumbel_max_step(std::span<const double> probs,
                            const ExtensionPredicate& allowed,
                            std::uint64_t step_seed);

SampleTrace gumbel_max_step(const Tokenizer& tokenizer,
                            std::span<const TokenId> seq,
                            const NextTokenDistribution& d,
                            std::uint64_t step_seed);

inline constexpr std::size_t kDefaultMaxDraws = 1'000'000;

// Independent draws from probs until one is allowed. Throws DeadEndError
// after max_draws failures.
SampleTrace rejection_step(std::span<const double> probs,
                           const ExtensionPredicate& allowed,
                           std::uint64_t step_seed,
                           std::size_t max_draws = kDefaultMaxDraws);

SampleTrace rejection_step(const Tokenizer& tokenizer,
                           std::span<const TokenId> seq,
                           const NextTokenDistribution& d,
                           std::uint64_t step_seed,
                           std::size_t max_draws = kDefaultMaxDraws);

}  // namespace canontok
