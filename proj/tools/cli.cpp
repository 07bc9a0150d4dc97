// Copyright 2026 The Evalcard Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "evalcard/evalcard.hpp"

namespace evalcard::cli {
namespace {

namespace fs = std::filesystem;

struct TokenizerFlags {
  bool no_lowercase = false;
  bool stem = false;
  bool remove_stopwords = false;

  TokenizerConfig config() const { return {!no_lowercase, stem, remove_stopwords}; }

  void add_to(CLI::App* cmd) {
    cmd->add_flag("--no-lowercase", no_lowercase, "Keep case when tokenizing");
    cmd->add_flag("--stem", stem, "Apply Porter stemming to tokens");
    cmd->add_flag("--remove-stopwords", remove_stopwords, "Drop common English stopwords");
  }
};

std::vector<std::string> split_words(const std::string& s, char sep = ' ') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Format resolve_format(const std::string& flag, const fs::path& path) {
  return flag.empty() ? format_from_path(path) : parse_format(flag);
}

// Writes to --out when given, otherwise to `fallback`.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw DataError("cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void print_warnings(std::ostream& err, const std::string& file,
                    const std::vector<Diagnostic>& warnings) {
  for (const auto& w : warnings) {
    err << "warning: " << file;
    if (w.line) err << ":" << w.line;
    err << ": " << w.message << "\n";
  }
}

struct ScoreArgs {
  std::string metric;
  std::string pairs;
  std::string format;
  std::string out;
  std::string command;
  unsigned timeout_ms = 30000;
  unsigned jobs = 1;
  TokenizerFlags tokenizer;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  std::unique_ptr<Metric> metric;
  if (!a.command.empty()) {
    metric = std::make_unique<ExternalMetric>(
        a.metric, split_words(a.command),
        ExternalScorerOptions{std::chrono::milliseconds(a.timeout_ms), 1});
  } else if (BuiltinMetric::canonical_name(a.metric)) {
    metric = std::make_unique<BuiltinMetric>(a.metric, a.tokenizer.config());
  } else {
    err << "error: unknown metric '" << a.metric << "'. Registered metrics:";
    for (const auto& n : BuiltinMetric::names()) err << " " << n;
    err << " (or pass --command to use an external scorer)\n";
    return kUsage;
  }

  const fs::path path = a.pairs;
  if (!fs::exists(path)) throw DataError("pairs file not found: " + path.string());
  auto loaded = load_pairs(path, resolve_format(a.format, path));
  print_warnings(err, path.string(), loaded.warnings);

  metric->start();
  const auto results = score_batch(*metric, loaded.records, a.jobs);
  Output sink(a.out, out);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    sink.get() << loaded.records[i].id << '\t';
    if (results[i].ok()) {
      sink.get() << format_score(results[i].score->value) << '\n';
    } else {
      sink.get() << "error\n";
      err << "error: " << loaded.records[i].id << ": " << results[i].error << "\n";
      ++failures;
    }
  }
  return failures == 0 ? kOk : kScorer;
}

struct CorruptArgs {
  std::string pairs;
  std::string format;
  std::string out;
  unsigned level = 0;
  std::uint64_t seed = 0;
  double rate = 0.10;
  std::string ops;
  TokenizerFlags tokenizer;
};

int cmd_corrupt(const CorruptArgs& a, std::ostream& out, std::ostream& err) {
  CorruptionSpec spec;
  spec.level = a.level;
  spec.rate = a.rate;
  spec.seed = a.seed;
  if (!a.ops.empty()) {
    spec.ops_enabled.clear();
    for (const auto& name : split_words(a.ops, ',')) spec.ops_enabled.push_back(parse_corruption_op(name));
  }
  spec.validate();

  const fs::path path = a.pairs;
  if (!fs::exists(path)) throw DataError("pairs file not found: " + path.string());
  auto loaded = load_pairs(path, resolve_format(a.format, path));
  print_warnings(err, path.string(), loaded.warnings);

  Output sink(a.out, out);
  for (const auto& pair : loaded.records) {
    const auto outcome = corrupt_pair(pair, spec, a.tokenizer.config());
    nlohmann::ordered_json j;
    j["id"] = pair.id;
    j["reference"] = pair.reference;
    j["hypothesis"] = outcome.tokens.source;
    j["edits"] = outcome.applied;
    sink.get() << j.dump() << '\n';
  }
  return kOk;
}

struct ScorecardArgs {
  std::string config;
  std::string out;
  std::string format;
  unsigned jobs = 0;
};

int cmd_scorecard(const ScorecardArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig config = load_run_config(a.config);
  if (a.jobs > 0) config.jobs = a.jobs;
  if (!a.out.empty()) config.output_path = a.out;
  if (!a.format.empty()) config.output_format = parse_report_format(a.format);
  config.validate();

  MetricRegistry registry = build_registry(config);
  std::vector<std::string> warnings;
  const ScorecardReport report = run_scorecard(config, registry, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  Output sink(config.output_path.empty() ? std::string() : config.output_path.string(), out);
  sink.get() << emit_report(report, config.output_format);

  bool failures = false;
  for (const auto& c : report.criteria)
    for (const auto& m : c.metrics)
      if (m.failed_count > 0) {
        failures = true;
        err << "error: " << m.metric << " failed on " << m.failed_count << " unit(s) in "
            << to_string(c.criterion) << (m.errors.empty() ? "" : ": " + m.errors.front()) << "\n";
      }
  return failures ? kScorer : kOk;
}

int cmd_convert_stsb(const std::string& in_path, const std::string& out_path,
                     std::ostream& out, std::ostream& err) {
  if (!fs::exists(in_path)) throw DataError("input file not found: " + in_path);
  auto loaded = load_similarity(in_path, Format::kStsb);
  print_warnings(err, in_path, loaded.warnings);
  Output sink(out_path, out);
  write_similarity(sink.get(), loaded.records);
  return kOk;
}

int cmd_group_mnli(const std::string& in_path, const std::string& format,
                   const std::string& out_path, std::ostream& out, std::ostream& err) {
  if (!fs::exists(in_path)) throw DataError("input file not found: " + in_path);
  std::ifstream in(in_path, std::ios::binary);
  auto labeled = read_labeled_pairs(in, resolve_format(format, in_path));
  print_warnings(err, in_path, labeled.warnings);
  auto triples = group_into_triples(labeled.records);
  print_warnings(err, in_path, triples.warnings);
  Output sink(out_path, out);
  write_entailment_triples(sink.get(), triples.records);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reference-based text evaluation metrics and the metric scorecard", "evalcard"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score every pair of a corpus with one metric; writes id<TAB>score lines");
  score_cmd->add_option("--metric", score.metric, "Metric id: bleu, rouge1, rouge2, rougeL (case-insensitive) or an external scorer name")->required();
  score_cmd->add_option("--pairs", score.pairs, "Pairs file (TSV id/reference/hypothesis or JSONL)")->required();
  score_cmd->add_option("--format", score.format, "Input format: tsv or jsonl (default: from extension)");
  score_cmd->add_option("--out", score.out, "Output file (default: stdout)");
  score_cmd->add_option("--command", score.command, "Launch command of an external scorer/1 process");
  score_cmd->add_option("--timeout-ms", score.timeout_ms, "External scorer response timeout in milliseconds")->capture_default_str();
  score_cmd->add_option("--jobs", score.jobs, "Worker threads for builtin metrics; results do not depend on it")->capture_default_str();
  score.tokenizer.add_to(score_cmd);

  CorruptArgs corrupt;
  auto* corrupt_cmd = app.add_subcommand("corrupt", "Corrupt the hypothesis side of every pair; writes JSONL");
  corrupt_cmd->add_option("--pairs", corrupt.pairs, "Pairs file (TSV or JSONL)")->required();
  corrupt_cmd->add_option("--level", corrupt.level, "Corruption severity level (0 = unchanged)")->required();
  corrupt_cmd->add_option("--seed", corrupt.seed, "Global RNG seed; per-pair seeds derive from it and the pair id")->required();
  corrupt_cmd->add_option("--ops", corrupt.ops, "Comma-separated ops: word_delete,word_insert,word_swap,char_typo (default: all)");
  corrupt_cmd->add_option("--rate", corrupt.rate, "Fraction of tokens edited per level")->capture_default_str();
  corrupt_cmd->add_option("--format", corrupt.format, "Input format: tsv or jsonl (default: from extension)");
  corrupt_cmd->add_option("--out", corrupt.out, "Output file (default: stdout)");
  corrupt.tokenizer.add_to(corrupt_cmd);

  ScorecardArgs scorecard;
  auto* scorecard_cmd = app.add_subcommand("scorecard", "Run every configured criterion for every configured metric");
  scorecard_cmd->add_option("--config", scorecard.config, "Run configuration (JSON)")->required();
  scorecard_cmd->add_option("--out", scorecard.out, "Report file; overrides output.path");
  scorecard_cmd->add_option("--format", scorecard.format, "Report format: json or markdown; overrides output.format");
  scorecard_cmd->add_option("--jobs", scorecard.jobs, "Worker threads; overrides jobs, results do not depend on it");

  std::string stsb_in, stsb_out;
  auto* stsb_cmd = app.add_subcommand("convert-stsb", "Convert an STS-B distribution file to canonical similarity TSV");
  stsb_cmd->add_option("--in", stsb_in, "STS-B file (genre, file, year, id, score, sentence1, sentence2)")->required();
  stsb_cmd->add_option("--out", stsb_out, "Output file (default: stdout)");

  std::string mnli_in, mnli_format, mnli_out;
  auto* mnli_cmd = app.add_subcommand("group-mnli", "Group MNLI-style labeled pairs into entailment triples (JSONL)");
  mnli_cmd->add_option("--in", mnli_in, "Labeled pairs: JSONL (premise/hypothesis/label or sentence1/sentence2/gold_label) or TSV")->required();
  mnli_cmd->add_option("--format", mnli_format, "Input format: tsv or jsonl (default: from extension)");
  mnli_cmd->add_option("--out", mnli_out, "Output file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*score_cmd) return cmd_score(score, out, err);
    if (*corrupt_cmd) return cmd_corrupt(corrupt, out, err);
    if (*scorecard_cmd) return cmd_scorecard(scorecard, out, err);
    if (*stsb_cmd) return cmd_convert_stsb(stsb_in, stsb_out, out, err);
    if (*mnli_cmd) return cmd_group_mnli(mnli_in, mnli_format, mnli_out, out, err);
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const ScorerError& e) {
    err << "error: " << e.what() << "\n";
    return kScorer;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace evalcard::cli
