#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canontok/core.hpp"

namespace canontok {

// Log-score differences at or below this are ties in Viterbi comparisons.
inline constexpr double kViterbiTieTolerance = 1e-10;

// All tokenizations of one string as a DAG over character positions.
// Path counts are exact below 2^53.
class TokenLattice {
 public:
  struct Edge {
    std::size_t begin = 0;
    std::size_t end = 0;
    TokenId token = 0;
  };

  struct Path {
    TokenSequence tokens;
    double log_score = 0.0;
  };

  // Includes every token whose surface equals a substring, regardless of the
  // continuation flag. Edges are sorted by (begin, token).
  TokenLattice(const Vocabulary& vocab, std::u32string_view text);

  std::size_t length() const { return length_; }
  const std::vector<Edge>& edges() const { return edges_; }
  // Edges leaving node i.
  std::span<const Edge> edges_from(std::size_t i) const;

  double forward_paths(std::size_t node) const { return forward_[node]; }
  double backward_paths(std::size_t node) const { return backward_[node]; }
  double total_paths() const { return forward_[length_]; }

  // Occurrences of `token` summed over all tokenizations.
  double count_occurrences(TokenId token) const;
  // count_occurrences for every id in [0, vocab_size), accumulated into `out`
  // scaled by `weight`.
  void accumulate_occurrences(std::span<double> out, double weight) const;

  // Highest-scoring tokenization using only tokens with `enabled[t]` true
  // (empty span enables all). Ties within kViterbiTieTolerance prefer fewer
  // tokens, then the lexicographically smallest id sequence. Empty optional
  // when no tokenization exists.
  std::optional<Path> best_path(std::span<const double> log_scores,
                                std::span<const char> enabled = {}) const;

  // Largest node reachable from 0 (== length() when fully coverable).
  std::size_t reach() const;

 private:
  std::size_t length_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> first_edge_;  // CSR offsets into edges_
  std::vector<double> forward_;
  std::vector<double> backward_;
};

// Σ over edges carrying `token` of forward_paths(begin) * backward_paths(end).
double count_token_occurrences(const TokenLattice& lattice, TokenId token);

struct UnigramTrainOptions {
  std::size_t max_piece_length = 8;
  // Multi-character substrings need at least this many corpus occurrences to
  // enter the seed vocabulary. Single characters always do.
  std::size_t min_frequency = 2;
  Execution execution = Execution::parallel;
};

// Seeds with single characters plus frequent substrings, then repeatedly
// scores tokens by lattice occurrence counts and drops the `prune_fraction`
// of multi-character tokens whose removal increases the best-path loss the
// least, renormalizing after each batch. Single characters are never removed.
// Stops at the target size or when nothing is removable.
TokenizerSpec train_unigram(std::span<const std::u32string> corpus,
                            std::size_t target_vocab_size,
                            double prune_fraction,
                            const UnigramTrainOptions& options = {});

// Per-token loss increase Σ_σ -log r_{V\{t}}(σ) - Σ_σ -log r_V(σ) for every
// multi-character token of `vocab`; NaN for single characters. `corpus` and
// `multiplicities` are parallel. This is the kernel behind train_unigram.
std::vector<double> removal_loss_increase(
    const Vocabulary& vocab, std::span<const double> log_scores,
    std::span<const std::u32string> corpus,
    std::span<const std::size_t> multiplicities, Execution execution);

// argmax over tokenizations of Π r(t) (Viterbi). Throws EncodingError with
// the first uncoverable position.
TokenSequence encode_unigram(const Tokenizer& tokenizer,
                             std::u32string_view text);

}  // namespace canontok
