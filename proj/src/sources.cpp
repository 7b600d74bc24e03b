#include "canontok/sources.hpp"

#include <fstream>
#include <sstream>

#include "canontok/canonicity.hpp"
#include "canontok/errors.hpp"
#include "json.hpp"

namespace canontok {

using Json = nlohmann::ordered_json;

namespace {

TokenSequence concat(std::span<const TokenId> a, std::span<const TokenId> b) {
  TokenSequence out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<double> parse_probs(const Json& value, std::size_t expected,
                                const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": 'probs' must be an array");
  if (value.size() != expected) {
    throw ParseError(where + ": 'probs' has " + std::to_string(value.size()) +
                     " entries, expected " + std::to_string(expected) +
                     " (vocabulary plus end-of-sequence)");
  }
  std::vector<double> probs;
  for (const auto& p : value) {
    if (!p.is_number()) throw ParseError(where + ": 'probs' entries must be numbers");
    probs.push_back(p.get<double>());
  }
  return probs;
}

TokenSequence parse_ids(const Json& value, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected id array");
  TokenSequence ids;
  for (const auto& v : value) {
    if (!v.is_number_unsigned()) throw ParseError(where + ": ids must be non-negative integers");
    ids.push_back(v.get<TokenId>());
  }
  return ids;
}

std::shared_ptr<const DistributionSource> source_from_json(
    const Json& doc, const std::shared_ptr<const Tokenizer>& tokenizer);

}  // namespace

BigramSource::BigramSource(std::size_t vocab_size, double smoothing)
    : vocab_size_(vocab_size),
      smoothing_(smoothing),
      counts_(vocab_size + 1),
      row_totals_(vocab_size + 1, 0.0) {
  if (!(smoothing > 0.0)) {
    throw ValidationError("bigram smoothing must be positive");
  }
}

BigramSource BigramSource::train(const Tokenizer& tokenizer,
                                 std::span<const std::u32string> corpus,
                                 double smoothing) {
  const std::size_t n = tokenizer.vocab_size();
  BigramSource source(n, smoothing);
  for (const auto& text : corpus) {
    if (text.empty()) continue;
    const TokenSequence seq = encode(tokenizer, text);
    auto prev = static_cast<TokenId>(n);
    for (TokenId t : seq) {
      source.add_count(prev, t, 1.0);
      prev = t;
    }
    source.add_count(prev, static_cast<TokenId>(n), 1.0);
  }
  return source;
}

void BigramSource::add_count(TokenId prev, TokenId next, double count) {
  if (prev > vocab_size_ || next > vocab_size_) {
    throw ValidationError("bigram count outside vocabulary");
  }
  counts_[prev][next] += count;
  row_totals_[prev] += count;
}

NextTokenDistribution BigramSource::next(std::span<const TokenId> prompt,
                                         std::span<const TokenId> output) const {
  auto prev = static_cast<TokenId>(vocab_size_);
  if (!output.empty()) {
    prev = output.back();
  } else if (!prompt.empty()) {
    prev = prompt.back();
  }
  if (prev > vocab_size_) throw InvalidSequenceError("context id outside vocabulary");
  NextTokenDistribution d;
  d.context = concat(prompt, output);
  const double denom =
      row_totals_[prev] + smoothing_ * static_cast<double>(vocab_size_ + 1);
  d.probs.assign(vocab_size_ + 1, smoothing_ / denom);
  for (const auto& [next, count] : counts_[prev]) {
    d.probs[next] = (count + smoothing_) / denom;
  }
  return d;
}

std::string BigramSource::to_json() const {
  Json doc;
  doc["type"] = "bigram";
  doc["smoothing"] = smoothing_;
  doc["vocab_size"] = vocab_size_;
  Json counts = Json::array();
  for (std::size_t prev = 0; prev < counts_.size(); ++prev) {
    for (const auto& [next, count] : counts_[prev]) {
      counts.push_back(Json::array({prev, next, count}));
    }
  }
  doc["counts"] = std::move(counts);
  return doc.dump() + "\n";
}

TableSource::TableSource(std::size_t vocab_size) : vocab_size_(vocab_size) {}

void TableSource::add(TokenSequence context, std::vector<double> probs) {
  NextTokenDistribution d{std::move(probs), context};
  if (d.probs.size() != vocab_size_ + 1) {
    throw ValidationError("table record has the wrong number of probabilities");
  }
  d.validate();
  table_[std::move(context)] = std::move(d.probs);
}

TableSource TableSource::from_jsonl(std::string_view text,
                                    std::size_t vocab_size) {
  TableSource source(vocab_size);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "table line " + std::to_string(line_no);
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!doc.contains("context") || !doc.contains("probs")) {
      throw ParseError(where + ": needs 'context' and 'probs'");
    }
    source.add(parse_ids(doc["context"], where),
               parse_probs(doc["probs"], vocab_size + 1, where));
  }
  return source;
}

NextTokenDistribution TableSource::next(std::span<const TokenId> prompt,
                                        std::span<const TokenId> output) const {
  TokenSequence context = concat(prompt, output);
  const auto it = table_.find(context);
  if (it == table_.end()) {
    std::string ids;
    for (TokenId t : context) ids += (ids.empty() ? "" : " ") + std::to_string(t);
    throw ValidationError("distribution table has no record for context [" +
                          ids + "]");
  }
  return NextTokenDistribution{it->second, std::move(context)};
}

std::string TableSource::to_json() const {
  Json doc;
  doc["type"] = "table";
  doc["vocab_size"] = vocab_size_;
  Json records = Json::array();
  for (const auto& [context, probs] : table_) {
    Json r;
    r["context"] = context;
    r["probs"] = probs;
    records.push_back(std::move(r));
  }
  doc["records"] = std::move(records);
  return doc.dump() + "\n";
}

PerturbedSource::PerturbedSource(std::shared_ptr<const DistributionSource> base,
                                 std::shared_ptr<const Tokenizer> tokenizer,
                                 double epsilon)
    : base_(std::move(base)), tokenizer_(std::move(tokenizer)), epsilon_(epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ValidationError("perturbation epsilon must lie in [0, 1]");
  }
  if (base_->vocab_size() != tokenizer_->vocab_size()) {
    throw ValidationError("perturbed source: vocabulary size mismatch");
  }
}

NextTokenDistribution PerturbedSource::next(
    std::span<const TokenId> prompt, std::span<const TokenId> output) const {
  NextTokenDistribution d = base_->next(prompt, output);
  if (epsilon_ == 0.0) return d;
  const auto mask =
      canonical_extension_mask(*tokenizer_, output, Execution::serial);
  std::size_t non_canonical = 0;
  for (char ok : mask) non_canonical += ok ? 0 : 1;
  if (non_canonical == 0) return d;
  const double share = epsilon_ / static_cast<double>(non_canonical);
  for (std::size_t t = 0; t < d.probs.size(); ++t) {
    d.probs[t] *= (1.0 - epsilon_);
    if (t < mask.size() && !mask[t]) d.probs[t] += share;
  }
  return d;
}

std::string PerturbedSource::to_json() const {
  Json doc;
  doc["type"] = "perturbed";
  doc["epsilon"] = epsilon_;
  doc["base"] = Json::parse(base_->to_json());
  return doc.dump() + "\n";
}

namespace {

std::shared_ptr<const DistributionSource> source_from_json(
    const Json& doc, const std::shared_ptr<const Tokenizer>& tokenizer) {
  const std::size_t n = tokenizer->vocab_size();
  const std::string type = doc.value("type", "");
  if (type == "bigram") {
    if (doc.value("vocab_size", std::size_t{0}) != n) {
      throw ValidationError("bigram model: vocab_size does not match the spec");
    }
    auto source = std::make_shared<BigramSource>(
        n, doc.value("smoothing", kDefaultBigramSmoothing));
    for (const auto& row : doc.at("counts")) {
      if (!row.is_array() || row.size() != 3) {
        throw ParseError("bigram model: counts entries must be [prev, next, count]");
      }
      source->add_count(row[0].get<TokenId>(), row[1].get<TokenId>(),
                        row[2].get<double>());
    }
    return source;
  }
  if (type == "table") {
    auto source = std::make_shared<TableSource>(n);
    std::size_t i = 0;
    for (const auto& r : doc.at("records")) {
      const std::string where = "table record " + std::to_string(i++);
      source->add(parse_ids(r.at("context"), where),
                  parse_probs(r.at("probs"), n + 1, where));
    }
    return source;
  }
  if (type == "perturbed") {
    return std::make_shared<PerturbedSource>(
        source_from_json(doc.at("base"), tokenizer), tokenizer,
        doc.at("epsilon").get<double>());
  }
  throw ParseError("language model: unknown type '" + type + "'");
}

}  // namespace

std::shared_ptr<const DistributionSource> source_from_text(
    std::string_view text, std::shared_ptr<const Tokenizer> tokenizer) {
  try {
    // A single JSON object with a "type" field, else table JSON lines.
    const Json doc = Json::parse(text, nullptr, false);
    if (!doc.is_discarded() && doc.is_object() && doc.contains("type")) {
      return source_from_json(doc, tokenizer);
    }
    return std::make_shared<TableSource>(
        TableSource::from_jsonl(text, tokenizer->vocab_size()));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("language model: ") + e.what());
  }
}

std::shared_ptr<const DistributionSource> load_source(
    const std::filesystem::path& path,
    std::shared_ptr<const Tokenizer> tokenizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return source_from_text(buf.str(), std::move(tokenizer));
}

}  // namespace canontok
