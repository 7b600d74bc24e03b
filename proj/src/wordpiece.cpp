#include "canontok/wordpiece.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "canontok/errors.hpp"
#include "canontok/utf8.hpp"

namespace canontok {

namespace {

__extension__ typedef unsigned __int128 Wide;

// True if a should be merged before b.
bool preferred(const WordPieceCandidate& a, const WordPieceCandidate& b) {
  // Exact comparison of pair/(l*r) via cross multiplication.
  const Wide lhs = Wide(a.pair_frequency) * b.left_frequency * b.right_frequency;
  const Wide rhs = Wide(b.pair_frequency) * a.left_frequency * a.right_frequency;
  if (lhs != rhs) return lhs > rhs;
  if (a.pair_frequency != b.pair_frequency) {
    return a.pair_frequency > b.pair_frequency;
  }
  return std::pair(a.left, a.right) < std::pair(b.left, b.right);
}

}  // namespace

std::vector<WordPieceCandidate> rank_wordpiece_pairs(
    std::span<const TokenSequence> sequences,
    std::span<const std::size_t> multiplicities) {
  std::map<TokenId, std::size_t> token_freq;
  std::map<std::pair<TokenId, TokenId>, std::size_t> pair_freq;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    const std::size_t weight = s < multiplicities.size() ? multiplicities[s] : 1;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      token_freq[seq[i]] += weight;
      if (i + 1 < seq.size()) pair_freq[{seq[i], seq[i + 1]}] += weight;
    }
  }
  std::vector<WordPieceCandidate> out;
  out.reserve(pair_freq.size());
  for (const auto& [pair, freq] : pair_freq) {
    out.push_back({pair.first, pair.second, freq, token_freq[pair.first],
                   token_freq[pair.second]});
  }
  std::sort(out.begin(), out.end(), preferred);
  return out;
}

TokenizerSpec train_wordpiece(std::span<const std::u32string> corpus,
                              std::size_t target_vocab_size) {
  std::map<std::u32string, std::size_t> words;
  for (const auto& text : corpus) {
    if (!text.empty()) ++words[text];
  }
  if (words.empty()) throw ValidationError("train_wordpiece: corpus is empty");

  TokenizerSpec spec;
  spec.kind = TokenizerKind::wordpiece;
  spec.alphabet = Alphabet::from_texts(corpus);

  std::set<std::pair<bool, char32_t>> initial;
  for (const auto& [text, count] : words) {
    for (std::size_t i = 0; i < text.size(); ++i) initial.insert({i > 0, text[i]});
  }
  for (const auto& [continuation, c] : initial) {
    spec.vocabulary.add(std::u32string(1, c), continuation);
  }
  if (target_vocab_size < spec.vocabulary.size()) {
    throw ValidationError("train_wordpiece: target vocabulary size " +
                          std::to_string(target_vocab_size) +
                          " is below the initial size " +
                          std::to_string(spec.vocabulary.size()));
  }

  std::vector<TokenSequence> state;
  std::vector<std::size_t> weights;
  for (const auto& [text, count] : words) {
    TokenSequence seq;
    for (std::size_t i = 0; i < text.size(); ++i) {
      seq.push_back(*spec.vocabulary.find(std::u32string(1, text[i]), i > 0));
    }
    state.push_back(std::move(seq));
    weights.push_back(count);
  }

  // Every iteration shortens the corpus, so this terminates even when a merge
  // reproduces an existing token.
  while (spec.vocabulary.size() < target_vocab_size) {
    const auto ranked = rank_wordpiece_pairs(state, weights);
    if (ranked.empty()) break;
    const WordPieceCandidate& best = ranked.front();
    const Token& left = spec.vocabulary.at(best.left);
    const Token& right = spec.vocabulary.at(best.right);
    std::u32string surface = left.surface + right.surface;
    const bool continuation = left.continuation;
    TokenId merged = 0;
    if (const auto existing = spec.vocabulary.find(surface, continuation)) {
      merged = *existing;
    } else {
      merged = spec.vocabulary.add(std::move(surface), continuation);
    }
    for (auto& seq : state) {
      std::size_t out = 0;
      for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i + 1 < seq.size() && seq[i] == best.left &&
            seq[i + 1] == best.right) {
          seq[out++] = merged;
          ++i;
        } else {
          seq[out++] = seq[i];
        }
      }
      seq.resize(out);
    }
  }
  return spec;
}

TokenSequence encode_wordpiece(const Tokenizer& tokenizer,
                               std::u32string_view text) {
  const Vocabulary& vocab = tokenizer.vocabulary();
  TokenSequence out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const bool continuation = pos > 0;
    const std::size_t longest =
        std::min(vocab.max_surface_length(continuation), text.size() - pos);
    bool matched = false;
    for (std::size_t len = longest; len > 0; --len) {
      if (const auto id = vocab.find(text.substr(pos, len), continuation)) {
        out.push_back(*id);
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw EncodingError("no " +
                              std::string(continuation ? "continuation"
                                                       : "word-initial") +
                              " token matches at position " +
                              std::to_string(pos) + " (" +
                              describe_char(text[pos]) + ")",
                          pos);
    }
  }
  return out;
}

}  // namespace canontok
