#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "canontok/core.hpp"
#include "canontok/sampling.hpp"

namespace canontok {

// Stands in for a language model: next-token distributions given the prompt
// and the output generated so far. Implementations are immutable.
class DistributionSource {
 public:
  virtual ~DistributionSource() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual NextTokenDistribution next(std::span<const TokenId> prompt,
                                     std::span<const TokenId> output) const = 0;
  // JSON document readable by load_source().
  virtual std::string to_json() const = 0;
};

inline constexpr double kDefaultBigramSmoothing = 0.01;

// Add-k smoothed bigram counts over canonically encoded text. Conditions on
// the last token of prompt|output, or on a begin marker when both are empty.
class BigramSource final : public DistributionSource {
 public:
  BigramSource(std::size_t vocab_size, double smoothing);

  static BigramSource train(const Tokenizer& tokenizer,
                            std::span<const std::u32string> corpus,
                            double smoothing = kDefaultBigramSmoothing);

  // prev == vocab_size() is the begin marker; next == vocab_size() is EOS.
  void add_count(TokenId prev, TokenId next, double count);

  std::size_t vocab_size() const override { return vocab_size_; }
  double smoothing() const { return smoothing_; }
  NextTokenDistribution next(std::span<const TokenId> prompt,
                             std::span<const TokenId> output) const override;
  std::string to_json() const override;

 private:
  std::size_t vocab_size_;
  double smoothing_;
  // Row per previous token (last row: begin marker), column per next id.
  std::vector<std::map<TokenId, double>> counts_;
  std::vector<double> row_totals_;
};

// Explicit context -> distribution records; lookups must match exactly.
class TableSource final : public DistributionSource {
 public:
  explicit TableSource(std::size_t vocab_size);

  // Parses JSON lines {"context": [ids], "probs": [floats]}.
  static TableSource from_jsonl(std::string_view text, std::size_t vocab_size);

  void add(TokenSequence context, std::vector<double> probs);

  std::size_t vocab_size() const override { return vocab_size_; }
  // Throws ValidationError when prompt|output has no record.
  NextTokenDistribution next(std::span<const TokenId> prompt,
                             std::span<const TokenId> output) const override;
  std::string to_json() const override;

 private:
  std::size_t vocab_size_;
  std::map<TokenSequence, std::vector<double>> table_;
};

// Moves probability mass `epsilon` from the wrapped source onto the tokens
// whose extension of the output would be non-canonical, split evenly. Leaves
// the distribution unchanged when every extension is canonical.
class PerturbedSource final : public DistributionSource {
 public:
  PerturbedSource(std::shared_ptr<const DistributionSource> base,
                  std::shared_ptr<const Tokenizer> tokenizer, double epsilon);

  std::size_t vocab_size() const override { return base_->vocab_size(); }
  double epsilon() const { return epsilon_; }
  NextTokenDistribution next(std::span<const TokenId> prompt,
                             std::span<const TokenId> output) const override;
  std::string to_json() const override;

 private:
  std::shared_ptr<const DistributionSource> base_;
  std::shared_ptr<const Tokenizer> tokenizer_;
  double epsilon_;
};

// Reads a source file: a JSON object with "type" "bigram" or "perturbed", or
// JSON lines of table records.
std::shared_ptr<const DistributionSource> source_from_text(
    std::string_view text, std::shared_ptr<const Tokenizer> tokenizer);
std::shared_ptr<const DistributionSource> load_source(
    const std::filesystem::path& path,
    std::shared_ptr<const Tokenizer> tokenizer);

}  // namespace canontok
