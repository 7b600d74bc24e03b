#include "canontok/unigram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "canontok/errors.hpp"
#include "canontok/utf8.hpp"

namespace canontok {

TokenLattice::TokenLattice(const Vocabulary& vocab, std::u32string_view text)
    : length_(text.size()) {
  const std::size_t max_len = std::max(vocab.max_surface_length(false),
                                       vocab.max_surface_length(true));
  first_edge_.assign(length_ + 2, 0);
  for (std::size_t i = 0; i < length_; ++i) {
    first_edge_[i] = edges_.size();
    const std::size_t row_start = edges_.size();
    for (std::size_t len = 1; len <= max_len && i + len <= length_; ++len) {
      const auto piece = text.substr(i, len);
      for (bool continuation : {false, true}) {
        if (const auto id = vocab.find(piece, continuation)) {
          edges_.push_back({i, i + len, *id});
        }
      }
    }
    std::sort(edges_.begin() + static_cast<std::ptrdiff_t>(row_start),
              edges_.end(),
              [](const Edge& a, const Edge& b) { return a.token < b.token; });
  }
  first_edge_[length_] = edges_.size();
  first_edge_[length_ + 1] = edges_.size();

  forward_.assign(length_ + 1, 0.0);
  backward_.assign(length_ + 1, 0.0);
  forward_[0] = 1.0;
  for (const Edge& e : edges_) forward_[e.end] += forward_[e.begin];
  backward_[length_] = 1.0;
  for (std::size_t i = length_; i-- > 0;) {
    for (const Edge& e : edges_from(i)) backward_[i] += backward_[e.end];
  }
}

std::span<const TokenLattice::Edge> TokenLattice::edges_from(
    std::size_t i) const {
  if (i >= length_) return {};
  return std::span<const Edge>(edges_).subspan(
      first_edge_[i], first_edge_[i + 1] - first_edge_[i]);
}

double TokenLattice::count_occurrences(TokenId token) const {
  double total = 0.0;
  for (const Edge& e : edges_) {
    if (e.token == token) total += forward_[e.begin] * backward_[e.end];
  }
  return total;
}

void TokenLattice::accumulate_occurrences(std::span<double> out,
                                          double weight) const {
  for (const Edge& e : edges_) {
    if (e.token < out.size()) {
      out[e.token] += weight * forward_[e.begin] * backward_[e.end];
    }
  }
}

std::size_t TokenLattice::reach() const {
  std::size_t furthest = 0;
  for (std::size_t i = 0; i <= length_; ++i) {
    if (forward_[i] > 0.0) furthest = i;
  }
  return furthest;
}

std::optional<TokenLattice::Path> TokenLattice::best_path(
    std::span<const double> log_scores, std::span<const char> enabled) const {
  constexpr double kUnreachable = -std::numeric_limits<double>::infinity();
  // Backward DP: best suffix from each node. Choosing the smallest first id
  // among tied suffixes yields the lexicographically smallest full sequence.
  std::vector<double> score(length_ + 1, kUnreachable);
  std::vector<std::size_t> count(length_ + 1, 0);
  std::vector<const Edge*> choice(length_ + 1, nullptr);
  score[length_] = 0.0;
  for (std::size_t i = length_; i-- > 0;) {
    for (const Edge& e : edges_from(i)) {
      if (!enabled.empty() && !enabled[e.token]) continue;
      if (score[e.end] == kUnreachable) continue;
      const double cand = log_scores[e.token] + score[e.end];
      const std::size_t cand_count = count[e.end] + 1;
      bool take = false;
      if (choice[i] == nullptr || cand > score[i] + kViterbiTieTolerance) {
        take = true;
      } else if (cand >= score[i] - kViterbiTieTolerance &&
                 cand_count < count[i]) {
        take = true;
      }
      if (take) {
        score[i] = cand;
        count[i] = cand_count;
        choice[i] = &e;
      }
    }
  }
  if (length_ > 0 && choice[0] == nullptr) return std::nullopt;
  Path path;
  path.log_score = score[0];
  for (std::size_t i = 0; i < length_; i = choice[i]->end) {
    path.tokens.push_back(choice[i]->token);
  }
  return path;
}

double count_token_occurrences(const TokenLattice& lattice, TokenId token) {
  return lattice.count_occurrences(token);
}

std::vector<double> removal_loss_increase(
    const Vocabulary& vocab, std::span<const double> log_scores,
    std::span<const std::u32string> corpus,
    std::span<const std::size_t> multiplicities, Execution execution) {
  const std::size_t n_words = corpus.size();
  std::vector<TokenLattice> lattices;
  lattices.reserve(n_words);
  for (const auto& word : corpus) lattices.emplace_back(vocab, word);

  // Only strings whose best path uses t can change when t is removed.
  std::vector<double> base(n_words, 0.0);
  std::vector<std::vector<std::size_t>> users(vocab.size());
  for (std::size_t w = 0; w < n_words; ++w) {
    const auto path = lattices[w].best_path(log_scores);
    if (!path) {
      throw ValidationError("unigram: corpus string is not coverable");
    }
    base[w] = path->log_score;
    TokenSequence used = path->tokens;
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    for (TokenId t : used) users[t].push_back(w);
  }

  const auto n_tokens = static_cast<std::int64_t>(vocab.size());
  std::vector<double> increase(vocab.size(),
                               std::numeric_limits<double>::quiet_NaN());
  auto evaluate = [&](std::int64_t t, std::vector<char>& enabled) {
    const auto id = static_cast<TokenId>(t);
    if (vocab.at(id).surface.size() <= 1) return;
    enabled[id] = 0;
    double total = 0.0;
    for (std::size_t w : users[id]) {
      const auto path = lattices[w].best_path(log_scores, enabled);
      const double weight = w < multiplicities.size()
                                ? static_cast<double>(multiplicities[w])
                                : 1.0;
      total += weight * (base[w] - path->log_score);
    }
    enabled[id] = 1;
    increase[id] = total;
  };

  if (execution == Execution::serial) {
    std::vector<char> enabled(vocab.size(), 1);
    for (std::int64_t t = 0; t < n_tokens; ++t) evaluate(t, enabled);
  } else {
#pragma omp parallel
    {
      std::vector<char> enabled(vocab.size(), 1);
#pragma omp for schedule(dynamic, 4)
      for (std::int64_t t = 0; t < n_tokens; ++t) evaluate(t, enabled);
    }
  }
  return increase;
}

namespace {

struct UnigramState {
  Vocabulary vocab;
  std::vector<double> scores;
};

UnigramState score_vocabulary(const std::vector<std::u32string>& surfaces,
                              std::span<const std::u32string> words,
                              std::span<const std::size_t> counts) {
  UnigramState state;
  for (const auto& s : surfaces) state.vocab.add(s);
  std::vector<double> freq(surfaces.size(), 0.0);
  for (std::size_t w = 0; w < words.size(); ++w) {
    TokenLattice(state.vocab, words[w])
        .accumulate_occurrences(freq, static_cast<double>(counts[w]));
  }
  double total = 0.0;
  for (double f : freq) total += f;
  state.scores.reserve(freq.size());
  for (double f : freq) state.scores.push_back(f / total);
  return state;
}

}  // namespace

TokenizerSpec train_unigram(std::span<const std::u32string> corpus,
                            std::size_t target_vocab_size,
                            double prune_fraction,
                            const UnigramTrainOptions& options) {
  if (!(prune_fraction > 0.0 && prune_fraction < 1.0)) {
    throw ValidationError("train_unigram: prune fraction must lie in (0, 1)");
  }
  std::map<std::u32string, std::size_t> word_counts;
  for (const auto& text : corpus) {
    if (!text.empty()) ++word_counts[text];
  }
  if (word_counts.empty()) throw ValidationError("train_unigram: corpus is empty");

  std::vector<std::u32string> words;
  std::vector<std::size_t> counts;
  for (const auto& [w, c] : word_counts) {
    words.push_back(w);
    counts.push_back(c);
  }

  const Alphabet alphabet = Alphabet::from_texts(corpus);
  std::map<std::u32string, std::size_t> substring_freq;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto& word = words[w];
    for (std::size_t i = 0; i < word.size(); ++i) {
      for (std::size_t len = 2;
           len <= options.max_piece_length && i + len <= word.size(); ++len) {
        substring_freq[word.substr(i, len)] += counts[w];
      }
    }
  }

  std::vector<std::u32string> surfaces;
  for (char32_t c : alphabet.chars()) surfaces.emplace_back(1, c);
  std::vector<std::u32string> pieces;
  for (const auto& [piece, freq] : substring_freq) {
    if (freq >= options.min_frequency) pieces.push_back(piece);
  }
  std::stable_sort(pieces.begin(), pieces.end(),
                   [](const auto& a, const auto& b) {
                     return a.size() < b.size();
                   });
  surfaces.insert(surfaces.end(), pieces.begin(), pieces.end());

  UnigramState state = score_vocabulary(surfaces, words, counts);
  while (state.vocab.size() > target_vocab_size) {
    std::vector<double> log_scores;
    for (double s : state.scores) log_scores.push_back(std::log(s));
    const auto increase = removal_loss_increase(
        state.vocab, log_scores, words, counts, options.execution);

    std::vector<TokenId> removable;
    for (TokenId t = 0; t < state.vocab.size(); ++t) {
      if (!std::isnan(increase[t])) removable.push_back(t);
    }
    if (removable.empty()) break;

    std::size_t batch = static_cast<std::size_t>(
        std::floor(prune_fraction * static_cast<double>(removable.size())));
    batch = std::max<std::size_t>(batch, 1);
    batch = std::min(batch, state.vocab.size() - target_vocab_size);

    // Cheapest first; equal losses drop the later-seeded token first.
    std::sort(removable.begin(), removable.end(), [&](TokenId a, TokenId b) {
      if (increase[a] != increase[b]) return increase[a] < increase[b];
      return a > b;
    });
    std::vector<char> drop(surfaces.size(), 0);
    for (std::size_t i = 0; i < batch; ++i) drop[removable[i]] = 1;
    std::vector<std::u32string> kept;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
      if (!drop[i]) kept.push_back(std::move(surfaces[i]));
    }
    surfaces = std::move(kept);
    state = score_vocabulary(surfaces, words, counts);
  }

  TokenizerSpec spec;
  spec.kind = TokenizerKind::unigram;
  spec.alphabet = alphabet;
  spec.vocabulary = std::move(state.vocab);
  spec.scores = std::move(state.scores);
  return spec;
}

TokenSequence encode_unigram(const Tokenizer& tokenizer,
                             std::u32string_view text) {
  const TokenLattice lattice(tokenizer.vocabulary(), text);
  auto path = lattice.best_path(tokenizer.log_scores());
  if (!path) {
    const std::size_t pos = lattice.reach();
    throw EncodingError("no token covers position " + std::to_string(pos) +
                            " (" + describe_char(text[pos]) + ")",
                        pos);
  }
  return std::move(path->tokens);
}

}  // namespace canontok
