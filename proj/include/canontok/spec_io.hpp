#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "canontok/core.hpp"

namespace canontok {

// JSON document:
//   {"kind": "bpe"|"wordpiece"|"unigram", "alphabet": [chars],
//    "tokens": [{"id", "surface", "continuation"}],
//    "merges": [[left, right, merged], ...]   (bpe only)
//    "scores": {"id": float}                  (unigram only)
//    "pretokenizer": bool}
// Output is deterministic: equal specs serialize to identical bytes.
std::string spec_to_json(const TokenizerSpec& spec);

// Throws ParseError naming the offending field, or ValidationError when the
// document is well-formed but violates a spec invariant.
TokenizerSpec spec_from_json(std::string_view json);

void save_spec(const TokenizerSpec& spec, const std::filesystem::path& path);
TokenizerSpec load_spec(const std::filesystem::path& path);

}  // namespace canontok
