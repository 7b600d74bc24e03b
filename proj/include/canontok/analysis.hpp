#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canontok/core.hpp"
#include "canontok/records.hpp"

namespace canontok {

struct PromptMultiplicity {
  std::string prompt_id;
  std::size_t same_string_pairs = 0;
  std::size_t differing_length_pairs = 0;
  double multiplicity_prob = 0.0;  // differing / same
};

struct MultiplicityEstimate {
  // Prompts with at least one same-string pair, sorted by id.
  std::vector<PromptMultiplicity> prompts;
  std::size_t prompts_with_multiplicity = 0;
  // Unweighted mean over `prompts`; empty when there are none.
  std::optional<double> mean;
  // Normal-approximation 95% interval over the per-prompt values, clipped to
  // [0, 1]. Zero width with fewer than two prompts.
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Pairs are unordered pairs of records sharing prompt_id and text.
MultiplicityEstimate multiplicity_probability(
    std::span<const GenerationRecord> records);

inline constexpr double kNormalQuantile975 = 1.959963984540054;

struct StringPriceVariation {
  std::string string_hash;  // FNV-1a 64 of the UTF-8 text, 16 hex digits
  std::string text;
  std::size_t records = 0;
  std::size_t min_len = 0;
  std::size_t max_len = 0;
  double rel_diff = 0.0;  // (max_len - min_len) / min_len
};

struct Quartiles {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct PriceVariation {
  // Strings (across all prompts) seen with at least two distinct token
  // counts, sorted by hash then text.
  std::vector<StringPriceVariation> strings;
  std::optional<Quartiles> summary;
};

PriceVariation relative_price_variation(std::span<const GenerationRecord> records);

std::string fnv1a64_hex(std::string_view bytes);

// Linear interpolation between order statistics. `values` must be non-empty.
Quartiles quartiles(std::vector<double> values);

struct RecordIssue {
  std::size_t index = 0;  // position in the input
  std::string reason;
};

// Checks the invariants a record must satisfy against a tokenizer: token ids
// in range, token_count equal to the number of tokens, decoded tokens equal
// to the text. Returns nullopt when valid.
std::optional<std::string> record_problem(const Tokenizer& tokenizer,
                                          const GenerationRecord& record);

struct NonCanonicityResult {
  std::size_t checked = 0;  // valid records carrying tokens
  std::size_t non_canonical = 0;
  std::optional<double> rate;
  std::vector<RecordIssue> excluded;
};

// Records without tokens are skipped; invalid ones are excluded and listed.
NonCanonicityResult non_canonicity_rate(const Tokenizer& tokenizer,
                                        std::span<const GenerationRecord> records,
                                        Execution execution = Execution::parallel);

inline constexpr std::size_t kMaxSubsequentOccurrences = 10;

struct WordConsistency {
  std::size_t all_same_noncanonical = 0;
  std::size_t all_canonical_after = 0;
  std::size_t mixed = 0;
  // First occurrence non-canonical, but the word never appeared again.
  std::size_t without_repeats = 0;
  std::vector<RecordIssue> excluded;

  std::size_t classified() const {
    return all_same_noncanonical + all_canonical_after + mixed;
  }
};

// Within each record, words are pretokenizer segments without surrounding
// spaces that contain a letter or digit. An occurrence's split is the set of
// token boundaries falling inside or on the edges of the word; it is
// canonical when it equals the split the encoder gives the whole text there.
// For each word whose first occurrence is non-canonical, the next (up to 10)
// occurrences are classified against it.
WordConsistency word_consistency(const Tokenizer& tokenizer,
                                 std::span<const GenerationRecord> records);

struct MultiplicityReport {
  MultiplicityEstimate multiplicity;
  PriceVariation prices;
  std::optional<NonCanonicityResult> non_canonicity;
  std::optional<WordConsistency> words;
};

// Multiplicity and price metrics from token counts; canonicity metrics when a
// tokenizer is given. Records that fail record_problem() are left out of all
// metrics and listed under non_canonicity.excluded.
MultiplicityReport build_report(std::span<const GenerationRecord> records,
                                const Tokenizer* tokenizer);

}  // namespace canontok
