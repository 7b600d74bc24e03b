#include "canontok/records.hpp"

#include <fstream>
#include <sstream>

#include "canontok/errors.hpp"
#include "json.hpp"

namespace canontok {

using Json = nlohmann::ordered_json;

std::string record_to_json(const GenerationRecord& record) {
  Json doc;
  doc["prompt_id"] = record.prompt_id;
  doc["seed"] = record.seed;
  if (!record.mode.empty()) doc["mode"] = record.mode;
  if (record.tokens) doc["tokens"] = *record.tokens;
  doc["token_count"] = record.token_count;
  doc["text"] = record.text;
  if (record.canonical) doc["canonical"] = *record.canonical;
  if (!record.evals.empty()) doc["evals"] = record.evals;
  return doc.dump() + "\n";
}

namespace {

const Json& require(const Json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw ParseError(std::string("record: missing field '") + key + "'");
  }
  return *it;
}

std::size_t as_count(const Json& value, const char* key) {
  if (!value.is_number_unsigned()) {
    throw ParseError(std::string("record: '") + key +
                     "' must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

}  // namespace

GenerationRecord record_from_json(std::string_view line) {
  Json doc;
  try {
    doc = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("record: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("record: expected a JSON object");

  GenerationRecord r;
  const Json& prompt = require(doc, "prompt_id");
  if (!prompt.is_string()) throw ParseError("record: 'prompt_id' must be a string");
  r.prompt_id = prompt.get<std::string>();
  const Json& text = require(doc, "text");
  if (!text.is_string()) throw ParseError("record: 'text' must be a string");
  r.text = text.get<std::string>();

  if (const auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) {
      throw ParseError("record: 'seed' must be a non-negative integer");
    }
    r.seed = it->get<std::uint64_t>();
  }
  if (const auto it = doc.find("mode"); it != doc.end()) {
    if (!it->is_string()) throw ParseError("record: 'mode' must be a string");
    r.mode = it->get<std::string>();
  }
  if (const auto it = doc.find("tokens"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("record: 'tokens' must be an array");
    TokenSequence ids;
    for (const auto& v : *it) {
      if (!v.is_number_unsigned()) {
        throw ParseError("record: 'tokens' entries must be non-negative integers");
      }
      ids.push_back(v.get<TokenId>());
    }
    r.tokens = std::move(ids);
  }
  if (const auto it = doc.find("token_count"); it != doc.end()) {
    r.token_count = as_count(*it, "token_count");
  } else if (r.tokens) {
    r.token_count = r.tokens->size();
  } else {
    throw ParseError("record: needs 'tokens' or 'token_count'");
  }
  if (const auto it = doc.find("canonical"); it != doc.end()) {
    if (!it->is_boolean()) throw ParseError("record: 'canonical' must be a bool");
    r.canonical = it->get<bool>();
  }
  if (const auto it = doc.find("evals"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("record: 'evals' must be an array");
    for (const auto& v : *it) r.evals.push_back(as_count(v, "evals"));
  }
  return r;
}

std::vector<GenerationRecord> parse_records(std::string_view jsonl) {
  std::vector<GenerationRecord> records;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(record_from_json(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<GenerationRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_records(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void append_records(const std::filesystem::path& path,
                    const std::vector<GenerationRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (const auto& r : records) out << record_to_json(r);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace canontok
