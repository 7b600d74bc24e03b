#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canontok/core.hpp"

namespace canontok {

// One generated output. `text` is UTF-8. Records imported from sources that
// only disclose lengths carry token_count without tokens.
struct GenerationRecord {
  std::string prompt_id;
  std::uint64_t seed = 0;
  std::string mode;
  std::string text;
  std::optional<TokenSequence> tokens;
  std::size_t token_count = 0;
  std::optional<bool> canonical;
  std::vector<std::size_t> evals;

  friend bool operator==(const GenerationRecord&,
                         const GenerationRecord&) = default;
};

// Single JSON line with keys in a fixed order, terminated by '\n'.
std::string record_to_json(const GenerationRecord& record);

// Requires prompt_id and text, plus tokens or token_count. token_count
// defaults to the number of tokens. Throws ParseError naming the field.
GenerationRecord record_from_json(std::string_view line);

// Blank lines are skipped; errors carry the 1-based line number.
std::vector<GenerationRecord> parse_records(std::string_view jsonl);
std::vector<GenerationRecord> load_records(const std::filesystem::path& path);
void append_records(const std::filesystem::path& path,
                    const std::vector<GenerationRecord>& records);

}  // namespace canontok
