#include "canontok/spec_io.hpp"

#include <fstream>
#include <sstream>

#include "canontok/errors.hpp"
#include "canontok/utf8.hpp"
#include "json.hpp"

namespace canontok {

using Json = nlohmann::ordered_json;

namespace {

const Json& require(const Json& doc, const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end()) {
    throw ParseError(std::string("field '") + field + "': missing");
  }
  return *it;
}

[[noreturn]] void bad_field(const std::string& field, const char* expected) {
  throw ParseError("field '" + field + "': expected " + expected);
}

std::uint64_t as_index(const Json& value, const std::string& field) {
  if (!value.is_number_unsigned()) bad_field(field, "non-negative integer");
  return value.get<std::uint64_t>();
}

std::u32string as_text(const Json& value, const std::string& field) {
  if (!value.is_string()) bad_field(field, "string");
  try {
    return utf8_to_u32(value.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError("field '" + field + "': " + e.what());
  }
}

}  // namespace

std::string spec_to_json(const TokenizerSpec& spec) {
  Json doc;
  doc["kind"] = std::string(to_string(spec.kind));
  Json alphabet = Json::array();
  for (char32_t c : spec.alphabet.chars()) alphabet.push_back(u32_to_utf8(c));
  doc["alphabet"] = std::move(alphabet);
  Json tokens = Json::array();
  for (const Token& t : spec.vocabulary.tokens()) {
    Json entry;
    entry["id"] = t.id;
    entry["surface"] = u32_to_utf8(t.surface);
    entry["continuation"] = t.continuation;
    tokens.push_back(std::move(entry));
  }
  doc["tokens"] = std::move(tokens);
  if (spec.kind == TokenizerKind::bpe) {
    Json merges = Json::array();
    for (const Merge& m : spec.merges) {
      merges.push_back(Json::array({m.left, m.right, m.merged}));
    }
    doc["merges"] = std::move(merges);
  }
  if (spec.kind == TokenizerKind::unigram) {
    Json scores = Json::object();
    for (std::size_t i = 0; i < spec.scores.size(); ++i) {
      scores[std::to_string(i)] = spec.scores[i];
    }
    doc["scores"] = std::move(scores);
  }
  doc["pretokenizer"] = spec.uses_pretokenizer;
  return doc.dump(2) + "\n";
}

TokenizerSpec spec_from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("spec document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("spec document: expected object");

  TokenizerSpec spec;
  const Json& kind = require(doc, "kind");
  if (!kind.is_string()) bad_field("kind", "string");
  try {
    spec.kind = parse_kind(kind.get<std::string>());
  } catch (const ValidationError&) {
    throw ParseError("field 'kind': unknown value '" +
                     kind.get<std::string>() + "'");
  }

  const Json& alphabet = require(doc, "alphabet");
  if (!alphabet.is_array()) bad_field("alphabet", "array");
  std::vector<char32_t> chars;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    const std::string field = "alphabet[" + std::to_string(i) + "]";
    const auto c = as_text(alphabet[i], field);
    if (c.size() != 1) bad_field(field, "single character");
    chars.push_back(c[0]);
  }
  spec.alphabet = Alphabet(std::move(chars));

  const Json& tokens = require(doc, "tokens");
  if (!tokens.is_array()) bad_field("tokens", "array");
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string prefix = "tokens[" + std::to_string(i) + "]";
    const Json& entry = tokens[i];
    if (!entry.is_object()) bad_field(prefix, "object");
    const auto id = as_index(require(entry, "id"), prefix + ".id");
    if (id != i) {
      throw ParseError("field '" + prefix + ".id': ids must be dense 0..n-1 " +
                       "in order (got " + std::to_string(id) + ")");
    }
    auto surface = as_text(require(entry, "surface"), prefix + ".surface");
    bool continuation = false;
    if (const auto it = entry.find("continuation"); it != entry.end()) {
      if (!it->is_boolean()) bad_field(prefix + ".continuation", "boolean");
      continuation = it->get<bool>();
    }
    spec.vocabulary.add(std::move(surface), continuation);
  }

  const auto merges = doc.find("merges");
  if (merges != doc.end()) {
    if (spec.kind != TokenizerKind::bpe) {
      throw ValidationError("merges: present but kind is " +
                            std::string(to_string(spec.kind)));
    }
    if (!merges->is_array()) bad_field("merges", "array");
    for (std::size_t i = 0; i < merges->size(); ++i) {
      const std::string field = "merges[" + std::to_string(i) + "]";
      const Json& rule = (*merges)[i];
      if (!rule.is_array() || rule.size() != 3) bad_field(field, "[left, right, merged]");
      spec.merges.push_back(Merge{
          static_cast<TokenId>(as_index(rule[0], field + "[0]")),
          static_cast<TokenId>(as_index(rule[1], field + "[1]")),
          static_cast<TokenId>(as_index(rule[2], field + "[2]"))});
    }
  } else if (spec.kind == TokenizerKind::bpe) {
    throw ParseError("field 'merges': missing (required for kind bpe)");
  }

  const auto scores = doc.find("scores");
  if (scores != doc.end()) {
    if (spec.kind != TokenizerKind::unigram) {
      throw ValidationError("scores: present but kind is " +
                            std::string(to_string(spec.kind)));
    }
    if (!scores->is_object()) bad_field("scores", "object");
    spec.scores.assign(spec.vocabulary.size(), 0.0);
    std::vector<bool> seen(spec.vocabulary.size(), false);
    for (const auto& [key, value] : scores->items()) {
      const std::string field = "scores." + key;
      std::size_t id = 0;
      try {
        std::size_t used = 0;
        id = std::stoul(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        bad_field(field, "token id key");
      }
      if (id >= spec.scores.size()) bad_field(field, "key within vocabulary");
      if (!value.is_number()) bad_field(field, "number");
      spec.scores[id] = value.get<double>();
      seen[id] = true;
    }
    for (std::size_t id = 0; id < seen.size(); ++id) {
      if (!seen[id]) {
        throw ParseError("field 'scores." + std::to_string(id) + "': missing");
      }
    }
  } else if (spec.kind == TokenizerKind::unigram) {
    throw ParseError("field 'scores': missing (required for kind unigram)");
  }

  if (const auto it = doc.find("pretokenizer"); it != doc.end()) {
    if (!it->is_boolean()) bad_field("pretokenizer", "boolean");
    spec.uses_pretokenizer = it->get<bool>();
  }

  spec.validate();
  return spec;
}

void save_spec(const TokenizerSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << spec_to_json(spec);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

TokenizerSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return spec_from_json(buf.str());
}

}  // namespace canontok
