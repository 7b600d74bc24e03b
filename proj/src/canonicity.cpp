#include "canontok/canonicity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "canontok/bpe.hpp"
#include "canontok/errors.hpp"
#include "canontok/pretok.hpp"
#include "canontok/unigram.hpp"

namespace canontok {

TokenSequence encode(const Tokenizer& tokenizer, std::u32string_view text) {
  if (tokenizer.uses_pretokenizer()) return encode_pretokenized(tokenizer, text);
  return encode_segment(tokenizer, text);
}

std::optional<TokenSequence> try_encode(const Tokenizer& tokenizer,
                                        std::u32string_view text) {
  try {
    return encode(tokenizer, text);
  } catch (const EncodingError&) {
    return std::nullopt;
  }
}

bool is_canonical(const Tokenizer& tokenizer, std::span<const TokenId> seq) {
  const std::u32string text = decode(tokenizer.spec(), seq);
  const auto encoded = try_encode(tokenizer, text);
  return encoded && std::equal(encoded->begin(), encoded->end(), seq.begin(),
                               seq.end());
}

ExtensionChecker::ExtensionChecker(const Tokenizer& tokenizer,
                                   std::span<const TokenId> seq)
    : tokenizer_(&tokenizer) {
  check_ids(tokenizer.vocabulary(), seq);
  if (seq.empty()) return;
  if (tokenizer.kind() == TokenizerKind::bpe && !tokenizer.uses_pretokenizer()) {
    pair_test_ = true;
    tail_.assign(seq.end() - 1, seq.end());
    return;
  }
  const DecodedText decoded = decode_with_offsets(tokenizer.spec(), seq);
  std::size_t first = 0;
  if (tokenizer.uses_pretokenizer()) {
    const auto spans = pretokenize_spans(default_pretoken_rule(), decoded.text);
    const std::size_t start = spans.back().begin;
    // Segments before the last one cannot change when text is appended.
    const auto it = std::find_if(
        decoded.offsets.begin(), decoded.offsets.end(),
        [&](const CharSpan& s) { return s.begin == start; });
    // Without an aligned boundary `seq` was not canonical; fall back to a
    // full re-encode.
    if (it != decoded.offsets.end()) {
      first = static_cast<std::size_t>(it - decoded.offsets.begin());
    }
  }
  tail_.assign(seq.begin() + static_cast<std::ptrdiff_t>(first), seq.end());
  tail_text_ = decoded.text.substr(decoded.offsets[first].begin);
}

bool ExtensionChecker::operator()(TokenId next) const {
  const Token& token = tokenizer_->vocabulary().at(next);
  if (pair_test_) return bpe_pair_canonical(*tokenizer_, tail_.back(), next);
  const auto encoded = try_encode(*tokenizer_, tail_text_ + token.surface);
  if (!encoded || encoded->size() != tail_.size() + 1) return false;
  return std::equal(tail_.begin(), tail_.end(), encoded->begin()) &&
         encoded->back() == next;
}

bool extension_is_canonical(const Tokenizer& tokenizer,
                            std::span<const TokenId> seq, TokenId next) {
  return ExtensionChecker(tokenizer, seq)(next);
}

std::vector<char> canonical_extension_mask(const Tokenizer& tokenizer,
                                           std::span<const TokenId> seq,
                                           Execution execution) {
  const ExtensionChecker checker(tokenizer, seq);
  const auto n = static_cast<std::int64_t>(tokenizer.vocab_size());
  std::vector<char> mask(tokenizer.vocab_size(), 0);
  if (execution == Execution::serial) {
    for (std::int64_t t = 0; t < n; ++t) {
      mask[t] = checker(static_cast<TokenId>(t)) ? 1 : 0;
    }
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t t = 0; t < n; ++t) {
      mask[t] = checker(static_cast<TokenId>(t)) ? 1 : 0;
    }
  }
  return mask;
}

std::vector<TokenSequence> enumerate_tokenizations(const Tokenizer& tokenizer,
                                                   std::u32string_view text,
                                                   std::size_t max_count) {
  const TokenLattice lattice(tokenizer.vocabulary(), text);
  if (text.size() > kMaxEnumerationLength) {
    std::ostringstream count_text;
    count_text << std::setprecision(15) << lattice.total_paths();
    throw ValidationError(
        "enumerate_tokenizations: text of length " +
        std::to_string(text.size()) + " exceeds the limit of " +
        std::to_string(kMaxEnumerationLength) + " (it has " +
        count_text.str() + " tokenizations)");
  }
  std::vector<TokenSequence> out;
  TokenSequence current;
  std::function<void(std::size_t)> visit = [&](std::size_t pos) {
    if (out.size() >= max_count) return;
    if (pos == text.size()) {
      out.push_back(current);
      return;
    }
    for (const auto& edge : lattice.edges_from(pos)) {
      if (lattice.backward_paths(edge.end) == 0.0) continue;
      current.push_back(edge.token);
      visit(edge.end);
      current.pop_back();
    }
  };
  if (!text.empty()) visit(0);
  return out;
}

}  // namespace canontok
