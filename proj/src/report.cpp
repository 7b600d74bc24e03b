#include "canontok/report.hpp"

#include <charconv>
#include <fstream>
#include <utility>
#include <vector>

#include "canontok/errors.hpp"
#include "json.hpp"

namespace canontok {

using Json = nlohmann::ordered_json;

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw ValidationError("unknown report format '" + std::string(name) +
                        "' (expected csv or json)");
}

std::string format_number(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

// A summary value is either a count or a real number.
struct Metric {
  std::string name;
  bool integral;
  double value;
};

std::vector<Metric> summary_metrics(const MultiplicityReport& report) {
  std::vector<Metric> out;
  auto count = [&](std::string name, std::size_t v) {
    out.push_back({std::move(name), true, static_cast<double>(v)});
  };
  auto real = [&](std::string name, double v) {
    out.push_back({std::move(name), false, v});
  };
  const auto& m = report.multiplicity;
  if (m.mean) {
    count("prompts_with_pairs", m.prompts.size());
    count("prompts_with_multiplicity", m.prompts_with_multiplicity);
    real("multiplicity_prob_mean", *m.mean);
    real("multiplicity_prob_ci95_low", m.ci_low);
    real("multiplicity_prob_ci95_high", m.ci_high);
  }
  if (const auto& q = report.prices.summary) {
    count("strings_with_variation", report.prices.strings.size());
    real("rel_diff_min", q->min);
    real("rel_diff_q1", q->q1);
    real("rel_diff_median", q->median);
    real("rel_diff_q3", q->q3);
    real("rel_diff_max", q->max);
  }
  if (report.non_canonicity) {
    const auto& nc = *report.non_canonicity;
    if (nc.rate) {
      count("records_checked", nc.checked);
      count("non_canonical_records", nc.non_canonical);
      real("non_canonicity_rate", *nc.rate);
    }
    if (!nc.excluded.empty()) count("excluded_records", nc.excluded.size());
  }
  if (report.words && report.words->classified() > 0) {
    const auto& w = *report.words;
    const auto total = static_cast<double>(w.classified());
    count("words_classified", w.classified());
    real("words_all_same_noncanonical",
         static_cast<double>(w.all_same_noncanonical) / total);
    real("words_all_canonical_after",
         static_cast<double>(w.all_canonical_after) / total);
    real("words_mixed", static_cast<double>(w.mixed) / total);
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string to_csv(const MultiplicityReport& report) {
  std::string out = "prompt_id,same_string_pairs,differing_length_pairs,multiplicity_prob\n";
  for (const auto& p : report.multiplicity.prompts) {
    out += csv_field(p.prompt_id) + "," + std::to_string(p.same_string_pairs) +
           "," + std::to_string(p.differing_length_pairs) + "," +
           format_number(p.multiplicity_prob) + "\n";
  }
  out += "\nstring_hash,min_len,max_len,rel_diff\n";
  for (const auto& s : report.prices.strings) {
    out += s.string_hash + "," + std::to_string(s.min_len) + "," +
           std::to_string(s.max_len) + "," + format_number(s.rel_diff) + "\n";
  }
  out += "\nmetric,value\n";
  for (const auto& m : summary_metrics(report)) {
    out += m.name + "," +
           (m.integral ? std::to_string(static_cast<std::size_t>(m.value))
                       : format_number(m.value)) +
           "\n";
  }
  return out;
}

std::string to_json(const MultiplicityReport& report) {
  Json doc;
  Json prompts = Json::array();
  for (const auto& p : report.multiplicity.prompts) {
    Json row;
    row["prompt_id"] = p.prompt_id;
    row["same_string_pairs"] = p.same_string_pairs;
    row["differing_length_pairs"] = p.differing_length_pairs;
    row["multiplicity_prob"] = p.multiplicity_prob;
    prompts.push_back(std::move(row));
  }
  Json strings = Json::array();
  for (const auto& s : report.prices.strings) {
    Json row;
    row["string_hash"] = s.string_hash;
    row["min_len"] = s.min_len;
    row["max_len"] = s.max_len;
    row["rel_diff"] = s.rel_diff;
    strings.push_back(std::move(row));
  }
  Json summary = Json::object();
  for (const auto& m : summary_metrics(report)) {
    if (m.integral) {
      summary[m.name] = static_cast<std::size_t>(m.value);
    } else {
      summary[m.name] = m.value;
    }
  }
  doc["prompts"] = std::move(prompts);
  doc["strings"] = std::move(strings);
  doc["summary"] = std::move(summary);
  return doc.dump(2) + "\n";
}

}  // namespace

std::string format_report(const MultiplicityReport& report,
                          ReportFormat format) {
  return format == ReportFormat::csv ? to_csv(report) : to_json(report);
}

void emit_report(const MultiplicityReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write report to '" + path.string() + "'");
  out << format_report(report, format);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace canontok
