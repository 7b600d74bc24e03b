#include "canontok/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "canontok/canonicity.hpp"
#include "canontok/errors.hpp"

namespace canontok {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t draw_bits(std::uint64_t step_seed, std::uint64_t counter) {
  return splitmix64(step_seed + (counter + 1) * kGolden);
}

}  // namespace

void NextTokenDistribution::validate() const {
  if (probs.empty()) throw ValidationError("distribution: empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
      throw ValidationError("distribution: entry " + std::to_string(i) +
                            " is negative or not finite");
    }
    sum += probs[i];
  }
  if (std::abs(sum - 1.0) > kDistributionSumTolerance) {
    throw ValidationError("distribution: probabilities sum to " +
                          std::to_string(sum));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_step_seed(std::uint64_t run_seed, std::uint64_t step) {
  return splitmix64(splitmix64(run_seed) ^ (step * kGolden));
}

double uniform_open01(std::uint64_t bits) {
  // 52 bits keep the half-step offset exact, so 1.0 is never reached.
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double gumbel_noise(std::uint64_t step_seed, TokenId token) {
  const double u = uniform_open01(draw_bits(step_seed, token));
  return -std::log(-std::log(u));
}

NextTokenDistribution canonicalize_distribution(const NextTokenDistribution& d,
                                                std::span<const char> mask) {
  NextTokenDistribution out;
  out.context = d.context;
  out.probs.assign(d.probs.size(), 0.0);
  const std::size_t eos = d.vocab_size();
  double z = 0.0;
  for (std::size_t t = 0; t < d.probs.size(); ++t) {
    if (t == eos || mask[t]) z += d.probs[t];
  }
  if (!(z > 0.0)) {
    throw DeadEndError("no canonical continuation has positive probability", 0);
  }
  for (std::size_t t = 0; t < d.probs.size(); ++t) {
    if (t == eos || mask[t]) out.probs[t] = d.probs[t] / z;
  }
  return out;
}

NextTokenDistribution canonicalize_distribution(const Tokenizer& tokenizer,
                                                std::span<const TokenId> seq,
                                                const NextTokenDistribution& d,
                                                Execution execution) {
  if (d.vocab_size() != tokenizer.vocab_size()) {
    throw ValidationError("distribution size does not match vocabulary");
  }
  const auto mask = canonical_extension_mask(tokenizer, seq, execution);
  return canonicalize_distribution(d, mask);
}

SampleTrace gumbel_max_select(std::span<const double> probs,
                              std::span<const double> gumbels,
                              const ExtensionPredicate& allowed) {
  const auto eos = static_cast<TokenId>(probs.size() - 1);
  std::vector<std::pair<double, TokenId>> heap;
  heap.reserve(probs.size());
  for (std::size_t t = 0; t < probs.size(); ++t) {
    if (probs[t] > 0.0) {
      heap.emplace_back(std::log(probs[t]) + gumbels[t],
                        static_cast<TokenId>(t));
    }
  }
  // Max-heap on the perturbed score; ties pop the smaller id first.
  auto less = [](const auto& a, const auto& b) {
    return a.first < b.first || (a.first == b.first && a.second > b.second);
  };
  std::make_heap(heap.begin(), heap.end(), less);
  SampleTrace trace;
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), less);
    const TokenId candidate = heap.back().second;
    heap.pop_back();
    ++trace.evaluations;
    if (candidate == eos || allowed(candidate)) {
      trace.token = candidate;
      return trace;
    }
  }
  throw DeadEndError("every token with positive probability was rejected", 0);
}

SampleTrace gumbel_max_step(std::span<const double> probs,
                            const ExtensionPredicate& allowed,
                            std::uint64_t step_seed) {
  std::vector<double> gumbels(probs.size());
  for (std::size_t t = 0; t < probs.size(); ++t) {
    gumbels[t] = gumbel_noise(step_seed, static_cast<TokenId>(t));
  }
  SampleTrace trace = gumbel_max_select(probs, gumbels, allowed);
  trace.step_seed = step_seed;
  return trace;
}

SampleTrace gumbel_max_step(const Tokenizer& tokenizer,
                            std::span<const TokenId> seq,
                            const NextTokenDistribution& d,
                            std::uint64_t step_seed) {
  const ExtensionChecker checker(tokenizer, seq);
  return gumbel_max_step(d.probs, std::cref(checker), step_seed);
}

SampleTrace rejection_step(std::span<const double> probs,
                           const ExtensionPredicate& allowed,
                           std::uint64_t step_seed, std::size_t max_draws) {
  const auto eos = static_cast<TokenId>(probs.size() - 1);
  double total = 0.0;
  for (double p : probs) total += p;
  SampleTrace trace;
  trace.step_seed = step_seed;
  for (std::size_t draw = 0; draw < max_draws; ++draw) {
    const double u = uniform_open01(draw_bits(step_seed, draw)) * total;
    // Inverse CDF; the fallback is the last id with mass.
    TokenId candidate = eos;
    double acc = 0.0;
    for (std::size_t t = 0; t < probs.size(); ++t) {
      if (probs[t] <= 0.0) continue;
      candidate = static_cast<TokenId>(t);
      acc += probs[t];
      if (u < acc) break;
    }
    ++trace.evaluations;
    if (candidate == eos || allowed(candidate)) {
      trace.token = candidate;
      return trace;
    }
  }
  throw DeadEndError("rejection sampling exceeded " +
                         std::to_string(max_draws) + " draws",
                     0);
}

SampleTrace rejection_step(const Tokenizer& tokenizer,
                           std::span<const TokenId> seq,
                           const NextTokenDistribution& d,
                           std::uint64_t step_seed, std::size_t max_draws) {
  const ExtensionChecker checker(tokenizer, seq);
  return rejection_step(d.probs, std::cref(checker), step_seed, max_draws);
}

}  // namespace canontok
