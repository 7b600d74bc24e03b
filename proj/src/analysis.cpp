#include "canontok/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "canontok/canonicity.hpp"
#include "canontok/errors.hpp"
#include "canontok/pretok.hpp"
#include "canontok/utf8.hpp"

namespace canontok {

namespace {

std::size_t pairs(std::size_t n) { return n * (n - (n > 0 ? 1 : 0)) / 2; }

}  // namespace

MultiplicityEstimate multiplicity_probability(
    std::span<const GenerationRecord> records) {
  // prompt -> text -> token_count -> records
  std::map<std::string,
           std::map<std::string, std::map<std::size_t, std::size_t>>>
      groups;
  for (const auto& r : records) ++groups[r.prompt_id][r.text][r.token_count];

  MultiplicityEstimate est;
  for (const auto& [prompt, texts] : groups) {
    PromptMultiplicity pm;
    pm.prompt_id = prompt;
    for (const auto& [text, counts] : texts) {
      std::size_t n = 0;
      std::size_t same_length = 0;
      for (const auto& [len, k] : counts) {
        n += k;
        same_length += pairs(k);
      }
      pm.same_string_pairs += pairs(n);
      pm.differing_length_pairs += pairs(n) - same_length;
    }
    if (pm.same_string_pairs == 0) continue;
    pm.multiplicity_prob = static_cast<double>(pm.differing_length_pairs) /
                           static_cast<double>(pm.same_string_pairs);
    if (pm.differing_length_pairs > 0) ++est.prompts_with_multiplicity;
    est.prompts.push_back(std::move(pm));
  }
  if (est.prompts.empty()) return est;

  const auto n = static_cast<double>(est.prompts.size());
  double sum = 0.0;
  for (const auto& pm : est.prompts) sum += pm.multiplicity_prob;
  const double mean = sum / n;
  double half = 0.0;
  if (est.prompts.size() >= 2) {
    double ss = 0.0;
    for (const auto& pm : est.prompts) {
      ss += (pm.multiplicity_prob - mean) * (pm.multiplicity_prob - mean);
    }
    half = kNormalQuantile975 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  est.mean = mean;
  est.ci_low = std::clamp(mean - half, 0.0, 1.0);
  est.ci_high = std::clamp(mean + half, 0.0, 1.0);
  return est;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[h & 0xF];
    h >>= 4;
  }
  return out;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw ValidationError("quartiles of an empty sample");
  std::sort(values.begin(), values.end());
  const auto at = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

PriceVariation relative_price_variation(
    std::span<const GenerationRecord> records) {
  std::map<std::string, std::vector<std::size_t>> by_text;
  for (const auto& r : records) by_text[r.text].push_back(r.token_count);

  PriceVariation out;
  for (const auto& [text, counts] : by_text) {
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    // A zero count with text present cannot be a real tokenization.
    if (*lo == *hi || *lo == 0) continue;
    StringPriceVariation s;
    s.string_hash = fnv1a64_hex(text);
    s.text = text;
    s.records = counts.size();
    s.min_len = *lo;
    s.max_len = *hi;
    s.rel_diff = static_cast<double>(*hi - *lo) / static_cast<double>(*lo);
    out.strings.push_back(std::move(s));
  }
  std::sort(out.strings.begin(), out.strings.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.string_hash, a.text) <
                     std::tie(b.string_hash, b.text);
            });
  if (!out.strings.empty()) {
    std::vector<double> diffs;
    for (const auto& s : out.strings) diffs.push_back(s.rel_diff);
    out.summary = quartiles(std::move(diffs));
  }
  return out;
}

std::optional<std::string> record_problem(const Tokenizer& tokenizer,
                                          const GenerationRecord& record) {
  if (!record.tokens) return std::nullopt;
  const TokenSequence& tokens = *record.tokens;
  if (tokens.size() != record.token_count) {
    return "token_count " + std::to_string(record.token_count) +
           " differs from " + std::to_string(tokens.size()) + " tokens";
  }
  try {
    if (decode_utf8(tokenizer.spec(), tokens) != record.text) {
      return std::string("tokens do not decode to text");
    }
  } catch (const InvalidSequenceError& e) {
    return std::string(e.what());
  }
  return std::nullopt;
}

NonCanonicityResult non_canonicity_rate(const Tokenizer& tokenizer,
                                        std::span<const GenerationRecord> records,
                                        Execution execution) {
  // verdict: -1 skipped (no tokens), -2 invalid, 0 canonical, 1 not
  std::vector<int> verdict(records.size(), -1);
  std::vector<std::string> reasons(records.size());
  auto check = [&](std::size_t i) {
    const auto& r = records[i];
    if (!r.tokens) return;
    if (auto problem = record_problem(tokenizer, r)) {
      verdict[i] = -2;
      reasons[i] = std::move(*problem);
      return;
    }
    verdict[i] = is_canonical(tokenizer, *r.tokens) ? 0 : 1;
  };
  if (execution == Execution::serial) {
    for (std::size_t i = 0; i < records.size(); ++i) check(i);
  } else {
    const auto n = static_cast<std::int64_t>(records.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < n; ++i) check(static_cast<std::size_t>(i));
  }

  NonCanonicityResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (verdict[i] == -2) {
      out.excluded.push_back({i, reasons[i]});
    } else if (verdict[i] >= 0) {
      ++out.checked;
      out.non_canonical += static_cast<std::size_t>(verdict[i]);
    }
  }
  if (out.checked > 0) {
    out.rate = static_cast<double>(out.non_canonical) /
               static_cast<double>(out.checked);
  }
  return out;
}

namespace {

std::vector<char> boundaries(const DecodedText& decoded) {
  std::vector<char> b(decoded.text.size() + 1, 0);
  b[0] = 1;
  for (const auto& s : decoded.offsets) b[s.end] = 1;
  return b;
}

struct WordState {
  std::vector<std::size_t> first_split;
  bool first_canonical = false;
  std::size_t seen_after = 0;
  std::size_t same_as_first = 0;
  std::size_t canonical_after = 0;
};

}  // namespace

WordConsistency word_consistency(const Tokenizer& tokenizer,
                                 std::span<const GenerationRecord> records) {
  WordConsistency out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.tokens) continue;
    if (auto problem = record_problem(tokenizer, r)) {
      out.excluded.push_back({i, std::move(*problem)});
      continue;
    }
    const DecodedText actual = decode_with_offsets(tokenizer.spec(), *r.tokens);
    const auto canonical = try_encode(tokenizer, actual.text);
    if (!canonical) {
      out.excluded.push_back({i, "text has no canonical tokenization"});
      continue;
    }
    const auto got = boundaries(actual);
    const auto want =
        boundaries(decode_with_offsets(tokenizer.spec(), *canonical));

    std::map<std::u32string, WordState> words;
    for (CharSpan seg : pretokenize_spans(default_pretoken_rule(), actual.text)) {
      while (seg.begin < seg.end &&
             classify(actual.text[seg.begin]) == CharClass::space) {
        ++seg.begin;
      }
      while (seg.end > seg.begin &&
             classify(actual.text[seg.end - 1]) == CharClass::space) {
        --seg.end;
      }
      const std::u32string_view word =
          std::u32string_view(actual.text).substr(seg.begin, seg.end - seg.begin);
      if (std::none_of(word.begin(), word.end(), [](char32_t c) {
            const CharClass k = classify(c);
            return k == CharClass::letter || k == CharClass::digit;
          })) {
        continue;
      }
      std::vector<std::size_t> split;
      bool is_canonical_split = true;
      for (std::size_t k = seg.begin; k <= seg.end; ++k) {
        if (got[k]) split.push_back(k - seg.begin);
        if (got[k] != want[k]) is_canonical_split = false;
      }
      auto [it, inserted] = words.try_emplace(std::u32string(word));
      WordState& st = it->second;
      if (inserted) {
        st.first_split = std::move(split);
        st.first_canonical = is_canonical_split;
        continue;
      }
      if (st.first_canonical || st.seen_after >= kMaxSubsequentOccurrences) {
        continue;
      }
      ++st.seen_after;
      if (split == st.first_split) ++st.same_as_first;
      if (is_canonical_split) ++st.canonical_after;
    }
    for (const auto& [word, st] : words) {
      if (st.first_canonical) continue;
      if (st.seen_after == 0) {
        ++out.without_repeats;
      } else if (st.same_as_first == st.seen_after) {
        ++out.all_same_noncanonical;
      } else if (st.canonical_after == st.seen_after) {
        ++out.all_canonical_after;
      } else {
        ++out.mixed;
      }
    }
  }
  return out;
}

MultiplicityReport build_report(std::span<const GenerationRecord> records,
                                const Tokenizer* tokenizer) {
  MultiplicityReport report;
  if (tokenizer == nullptr) {
    report.multiplicity = multiplicity_probability(records);
    report.prices = relative_price_variation(records);
    return report;
  }
  report.non_canonicity = non_canonicity_rate(*tokenizer, records);
  std::vector<char> bad(records.size(), 0);
  for (const auto& issue : report.non_canonicity->excluded) bad[issue.index] = 1;
  std::vector<GenerationRecord> valid;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!bad[i]) valid.push_back(records[i]);
  }
  report.multiplicity = multiplicity_probability(valid);
  report.prices = relative_price_variation(valid);
  report.words = word_consistency(*tokenizer, records);
  return report;
}

}  // namespace canontok
