#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "canontok/analysis.hpp"
#include "canontok/bpe.hpp"
#include "canontok/canonicity.hpp"
#include "canontok/errors.hpp"
#include "canontok/generation.hpp"
#include "canontok/pretok.hpp"
#include "canontok/records.hpp"
#include "canontok/report.hpp"
#include "canontok/sources.hpp"
#include "canontok/spec_io.hpp"
#include "canontok/unigram.hpp"
#include "canontok/utf8.hpp"
#include "canontok/wordpiece.hpp"
#include "json.hpp"

namespace canontok::cli {

namespace {

// Bad flag values detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string read_all(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string strip_newline(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::vector<std::u32string> read_corpus(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::u32string> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      lines.push_back(utf8_to_u32(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lines;
}

TokenSequence parse_ids(const std::string& text) {
  TokenSequence ids;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || token[0] == '-' || v > 0xFFFFFFFFULL) {
      throw UsageError("not a token id: '" + token + "'");
    }
    ids.push_back(static_cast<TokenId>(v));
    token.clear();
  };
  for (char c : text) {
    if (c == ' ' || c == ',' || c == '\n' || c == '\t' || c == '\r') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  return ids;
}

std::string join_ids(std::span<const TokenId> ids) {
  std::string out;
  for (TokenId t : ids) {
    if (!out.empty()) out += ' ';
    out += std::to_string(t);
  }
  return out;
}

std::string describe_tokens(const Tokenizer& tok, std::span<const TokenId> ids) {
  std::string out;
  for (TokenId t : ids) {
    const Token& token = tok.vocabulary().at(t);
    if (!out.empty()) out += ' ';
    out += nlohmann::json(std::string(token.continuation ? "##" : "") +
                          u32_to_utf8(token.surface))
               .dump();
  }
  return out;
}

std::shared_ptr<const Tokenizer> load_tokenizer(const std::string& path) {
  return std::make_shared<const Tokenizer>(load_spec(path));
}

struct TrainArgs {
  std::string algo;
  std::string input;
  std::string out;
  std::size_t merges = 0;
  std::size_t vocab_size = 0;
  double prune = 0.2;
  bool pretokenize = false;
  CLI::Option* merges_opt = nullptr;
  CLI::Option* vocab_opt = nullptr;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto lines = read_corpus(a.input);
  std::vector<std::u32string> corpus;
  for (const auto& line : lines) {
    if (!a.pretokenize) {
      corpus.push_back(line);
      continue;
    }
    for (auto& seg : pretokenize(line)) corpus.push_back(std::move(seg));
  }
  TokenizerSpec spec;
  if (a.algo == "bpe") {
    if (!a.merges_opt->count()) throw UsageError("train bpe needs --merges");
    spec = train_bpe(corpus, a.merges);
  } else {
    if (!a.vocab_opt->count()) {
      throw UsageError("train " + a.algo + " needs --vocab-size");
    }
    spec = a.algo == "wordpiece" ? train_wordpiece(corpus, a.vocab_size)
                                 : train_unigram(corpus, a.vocab_size, a.prune);
  }
  spec.uses_pretokenizer = a.pretokenize;
  spec.validate();
  save_spec(spec, a.out);
  out << "wrote " << a.out << ": " << to_string(spec.kind) << ", "
      << spec.vocabulary.size() << " tokens\n";
  return kExitOk;
}

struct TextArgs {
  std::string spec;
  std::string text;
  std::string ids;
  CLI::Option* text_opt = nullptr;
  CLI::Option* ids_opt = nullptr;
};

int cmd_encode(const TextArgs& a, std::istream& in, std::ostream& out) {
  const auto tok = load_tokenizer(a.spec);
  const std::string text =
      a.text_opt->count() ? a.text : strip_newline(read_all(in));
  const TokenSequence ids = encode(*tok, utf8_to_u32(text));
  out << join_ids(ids) << "\n" << describe_tokens(*tok, ids) << "\n";
  return kExitOk;
}

int cmd_decode(const TextArgs& a, std::istream& in, std::ostream& out) {
  const auto tok = load_tokenizer(a.spec);
  const TokenSequence ids = parse_ids(a.ids_opt->count() ? a.ids : read_all(in));
  out << decode_utf8(tok->spec(), ids) << "\n";
  return kExitOk;
}

int cmd_check(const TextArgs& a, std::istream& in, std::ostream& out) {
  const auto tok = load_tokenizer(a.spec);
  const TokenSequence ids = parse_ids(a.ids_opt->count() ? a.ids : read_all(in));
  const std::u32string text = decode(tok->spec(), ids);
  const auto encoded = try_encode(*tok, text);
  if (encoded && *encoded == ids) {
    out << "canonical\n";
    return kExitOk;
  }
  out << "non-canonical\n";
  if (encoded) {
    out << "canonical tokenization: " << join_ids(*encoded) << "\n";
  } else {
    out << "the decoded text has no tokenization under this spec\n";
  }
  return kExitNegative;
}

struct LmArgs {
  std::string spec;
  std::string input;
  std::string out;
  double smoothing = kDefaultBigramSmoothing;
  double perturb = 0.0;
  CLI::Option* perturb_opt = nullptr;
};

int cmd_lm(const LmArgs& a, std::ostream& out) {
  const auto tok = load_tokenizer(a.spec);
  const auto corpus = read_corpus(a.input);
  auto bigram = std::make_shared<const BigramSource>(
      BigramSource::train(*tok, corpus, a.smoothing));
  std::shared_ptr<const DistributionSource> model = bigram;
  if (a.perturb_opt->count()) {
    model = std::make_shared<const PerturbedSource>(bigram, tok, a.perturb);
  }
  std::ofstream file(a.out, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write '" + a.out + "'");
  file << model->to_json();
  if (!file) throw Error("write to '" + a.out + "' failed");
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

struct SampleArgs {
  std::string spec;
  std::string lm;
  std::string mode = "canonical";
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::size_t max_len = 32;
  std::string out;
  std::string prompt_id = "p0";
  std::string prompt;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

std::uint64_t resolve_seed(const SampleArgs& a) {
  if (a.seed_opt->count()) return a.seed;
  const char* env = std::getenv("CANONTOK_SEED");
  if (env == nullptr || *env == '\0') {
    throw UsageError("sample needs --seed or CANONTOK_SEED");
  }
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(env, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != std::string(env).size() || env[0] == '-') {
    throw UsageError(std::string("CANONTOK_SEED is not an unsigned integer: '") +
                     env + "'");
  }
  return v;
}

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a);
  const GenerationMode mode = parse_mode(a.mode);
  const auto tok = load_tokenizer(a.spec);
  const auto source = load_source(a.lm, tok);
  const TokenSequence prompt = encode(*tok, utf8_to_u32(a.prompt));
  const auto results = generate_batch(*tok, *source, mode, prompt, a.max_len,
                                      seed, a.count, Execution::parallel);
  std::vector<GenerationRecord> records;
  records.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    GenerationRecord rec;
    rec.prompt_id = a.prompt_id;
    rec.seed = seed + i;
    rec.mode = std::string(to_string(mode));
    rec.text = decode_utf8(tok->spec(), r.tokens);
    rec.tokens = r.tokens;
    rec.token_count = r.tokens.size();
    rec.canonical = is_canonical(*tok, r.tokens);
    for (const auto& t : r.traces) rec.evals.push_back(t.evaluations);
    records.push_back(std::move(rec));
  }
  if (a.out_opt->count()) {
    append_records(a.out, records);
  } else {
    for (const auto& r : records) out << record_to_json(r);
  }
  return kExitOk;
}

struct AnalyzeArgs {
  std::string spec;
  std::vector<std::string> records;
  std::string report;
  std::string format = "csv";
  CLI::Option* spec_opt = nullptr;
  CLI::Option* report_opt = nullptr;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const ReportFormat format = parse_report_format(a.format);
  std::shared_ptr<const Tokenizer> tok;
  if (a.spec_opt->count()) tok = load_tokenizer(a.spec);
  std::vector<GenerationRecord> records;
  for (const auto& path : a.records) {
    auto part = load_records(path);
    records.insert(records.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  const MultiplicityReport report = build_report(records, tok.get());
  if (report.non_canonicity) {
    for (const auto& issue : report.non_canonicity->excluded) {
      err << "excluded record " << issue.index << ": " << issue.reason << "\n";
    }
  }
  if (!a.report_opt->count()) {
    out << format_report(report, format);
    return kExitOk;
  }
  emit_report(report, format, a.report);
  out << records.size() << " records, " << report.multiplicity.prompts.size()
      << " prompts with same-string pairs, " << report.prices.strings.size()
      << " strings with length variation\n";
  if (report.multiplicity.mean) {
    out << "multiplicity probability " << format_number(*report.multiplicity.mean)
        << "\n";
  }
  if (report.non_canonicity && report.non_canonicity->rate) {
    out << "non-canonicity rate " << format_number(*report.non_canonicity->rate)
        << "\n";
  }
  out << "wrote " << a.report << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Tokenizer training, canonicity checks, canonical sampling "
               "and tokenization-multiplicity analysis"};
  app.name("canontok");
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a tokenizer spec");
  train_cmd->add_option("--algo", train.algo, "bpe, wordpiece or unigram")
      ->required()
      ->check(CLI::IsMember({"bpe", "wordpiece", "unigram"}));
  train_cmd->add_option("--input", train.input, "corpus, one document per line")
      ->required();
  train_cmd->add_option("--out", train.out, "spec path")->required();
  train.merges_opt =
      train_cmd->add_option("--merges", train.merges, "bpe: number of merges");
  train.vocab_opt = train_cmd->add_option("--vocab-size", train.vocab_size,
                                          "wordpiece/unigram: target size");
  train_cmd
      ->add_option("--prune", train.prune,
                   "unigram: fraction pruned per round")
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_flag("--pretokenize", train.pretokenize,
                      "split text with the built-in pretokenizer");

  TextArgs enc;
  auto* encode_cmd = app.add_subcommand("encode", "print the canonical encoding");
  encode_cmd->add_option("--spec", enc.spec)->required();
  enc.text_opt = encode_cmd->add_option("--text", enc.text, "text (else stdin)");

  TextArgs dec;
  auto* decode_cmd = app.add_subcommand("decode", "print the text of token ids");
  decode_cmd->add_option("--spec", dec.spec)->required();
  dec.ids_opt = decode_cmd->add_option("--ids", dec.ids, "ids (else stdin)");

  TextArgs chk;
  auto* check_cmd = app.add_subcommand(
      "check", "exit 0 if the ids are canonical, 1 otherwise");
  check_cmd->add_option("--spec", chk.spec)->required();
  chk.ids_opt = check_cmd->add_option("--ids", chk.ids, "ids (else stdin)");

  LmArgs lm;
  auto* lm_cmd = app.add_subcommand("lm", "train a toy bigram model");
  lm_cmd->add_option("--spec", lm.spec)->required();
  lm_cmd->add_option("--input", lm.input, "corpus, one document per line")
      ->required();
  lm_cmd->add_option("--out", lm.out)->required();
  lm_cmd->add_option("--smoothing", lm.smoothing, "add-k constant")
      ->check(CLI::PositiveNumber);
  lm.perturb_opt =
      lm_cmd
          ->add_option("--perturb", lm.perturb,
                       "mass moved onto non-canonical extensions")
          ->check(CLI::Range(0.0, 1.0));

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "generate records");
  sample_cmd->add_option("--spec", sample.spec)->required();
  sample_cmd->add_option("--lm", sample.lm, "bigram, perturbed or table model")
      ->required();
  sample_cmd->add_option("--mode", sample.mode)
      ->check(CLI::IsMember({"standard", "canonical", "rejection"}));
  sample.seed_opt = sample_cmd->add_option(
      "--seed", sample.seed, "run seed (default: $CANONTOK_SEED)");
  sample_cmd->add_option("-n", sample.count, "generations; seeds seed..seed+n-1");
  sample_cmd->add_option("--max-len", sample.max_len);
  sample.out_opt =
      sample_cmd->add_option("--out", sample.out, "append records here");
  sample_cmd->add_option("--prompt-id", sample.prompt_id);
  sample_cmd->add_option("--prompt", sample.prompt, "prompt text");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "multiplicity report");
  analyze.spec_opt = analyze_cmd->add_option(
      "--spec", analyze.spec, "enables canonicity metrics");
  analyze_cmd->add_option("--records", analyze.records, "record files")
      ->required();
  analyze.report_opt =
      analyze_cmd->add_option("--report", analyze.report, "output (else stdout)");
  analyze_cmd->add_option("--format", analyze.format)
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*encode_cmd) return cmd_encode(enc, in, out);
    if (*decode_cmd) return cmd_decode(dec, in, out);
    if (*check_cmd) return cmd_check(chk, in, out);
    if (*lm_cmd) return cmd_lm(lm, out);
    if (*sample_cmd) return cmd_sample(sample, out);
    if (*analyze_cmd) return cmd_analyze(analyze, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace canontok::cli
