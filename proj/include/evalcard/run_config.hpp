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

// Scorecard run configuration (a JSON document) and the end-to-end run.
//
// {
//   "seed": 17,                              required when "corruption" is set
//   "jobs": 1,                               parallelism; never changes results
//   "tokenizer": {"lowercase": true, "stem": false, "remove_stopwords": false},
//   "bleu": {"max_order": 4, "smoothing_epsilon": 0.01},
//   "rouge_beta": 1.0,
//   "metrics": ["bleu", "rouge1", "rouge2", "rougeL",
//               {"name": "sts", "command": ["python3", "scorer.py"],
//                "timeout_ms": 30000}],
//   "similarity": {"path": "sts.tsv", "format": "tsv"},        tsv | stsb
//   "entailment": {"path": "triples.jsonl"},                  jsonl triples
//              or {"path": "mnli.jsonl", "format": "jsonl", "labeled": true}
//   "corruption": {"path": "pairs.tsv", "format": "tsv", "limit": 500,
//                  "low":  {"level": 1, "rate": 0.1, "ops": ["word_delete"]},
//                  "high": {"level": 3, "rate": 0.1, "ops": ["word_delete"]}},
//   "output": {"path": "report.json", "format": "json"}         json | markdown
// }
//
// Relative paths resolve against the directory holding the config file. At
// least one of similarity / entailment / corruption must be present.

#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "evalcard/corruption.hpp"
#include "evalcard/datasets.hpp"
#include "evalcard/error.hpp"
#include "evalcard/ngram_metrics.hpp"
#include "evalcard/rng.hpp"
#include "evalcard/scorecard.hpp"
#include "evalcard/scorer_bridge.hpp"

namespace evalcard {

struct MetricSpec {
  std::string name;
  /// Empty for builtin metrics.
  std::vector<std::string> command;
  std::chrono::milliseconds timeout{30000};
};

struct DatasetSpec {
  std::filesystem::path path;
  Format format = Format::kTsv;
  /// Entailment only: the file holds labeled pairs to be grouped.
  bool labeled = false;
  /// Corruption only: use at most this many pairs (0 = all).
  std::size_t limit = 0;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  TokenizerConfig tokenizer;
  BleuConfig bleu;
  double rouge_beta = 1.0;
  std::vector<MetricSpec> metrics;
  std::optional<DatasetSpec> similarity;
  std::optional<DatasetSpec> entailment;
  std::optional<DatasetSpec> corruption;
  CorruptionSpec corruption_low;
  CorruptionSpec corruption_high;
  std::filesystem::path output_path;
  ReportFormat output_format = ReportFormat::kJson;
  /// FNV-1a digest of the result-relevant part of the config document.
  std::string digest;

  /// Checks cross-field invariants and that every input file exists.
  /// Throws InvalidArgument or DataError (missing file).
  void validate() const {
    if (metrics.empty()) throw InvalidArgument("config lists no metrics");
    if (!similarity && !entailment && !corruption)
      throw InvalidArgument("config enables no criterion");
    if (corruption && !seed)
      throw InvalidArgument("a seed is mandatory when corruption is configured");
    if (jobs == 0) throw InvalidArgument("jobs must be >= 1");
    bleu.validate();
    RougeConfig{RougeVariant::kN, 1, rouge_beta}.validate();
    if (corruption) {
      corruption_low.validate();
      corruption_high.validate();
      if (corruption_high.level <= corruption_low.level)
        throw InvalidArgument("corruption.high.level must exceed corruption.low.level");
    }
    for (const auto* d : {&similarity, &entailment, &corruption})
      if (*d && !std::filesystem::exists((*d)->path))
        throw DataError("input file not found: " + (*d)->path.string());
  }
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::uint64_t require_uint(const nlohmann::json& j, const char* what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw InvalidArgument(std::string(what) + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

inline CorruptionSpec parse_corruption_level(const nlohmann::json& j,
                                             const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string("corruption.") + what + " must be an object");
  CorruptionSpec spec;
  spec.level = static_cast<unsigned>(require_uint(j.at("level"), "corruption level"));
  if (j.contains("rate")) spec.rate = j.at("rate").get<double>();
  if (j.contains("ops")) {
    spec.ops_enabled.clear();
    for (const auto& op : j.at("ops")) spec.ops_enabled.push_back(parse_corruption_op(op.get<std::string>()));
  }
  return spec;
}

inline DatasetSpec parse_dataset(const nlohmann::json& j,
                                 const std::filesystem::path& base,
                                 Format default_format) {
  if (!j.is_object() || !j.contains("path"))
    throw InvalidArgument("dataset entries need a \"path\"");
  DatasetSpec d;
  std::filesystem::path p = j.at("path").get<std::string>();
  d.path = p.is_absolute() ? p : base / p;
  d.format = j.contains("format") ? parse_format(j.at("format").get<std::string>())
                                  : default_format;
  d.labeled = j.value("labeled", false);
  if (j.contains("limit")) d.limit = require_uint(j.at("limit"), "limit");
  return d;
}

}  // namespace detail

/// Parses a config document. `base_dir` anchors relative paths.
inline RunConfig parse_run_config(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
  RunConfig c;
  try {
    if (doc.contains("seed") && !doc["seed"].is_null())
      c.seed = detail::require_uint(doc["seed"], "seed");
    if (doc.contains("jobs"))
      c.jobs = static_cast<unsigned>(detail::require_uint(doc["jobs"], "jobs"));
    if (doc.contains("tokenizer")) {
      const auto& t = doc["tokenizer"];
      c.tokenizer.lowercase = t.value("lowercase", true);
      c.tokenizer.stem = t.value("stem", false);
      c.tokenizer.remove_stopwords = t.value("remove_stopwords", false);
    }
    if (doc.contains("bleu")) {
      const auto& b = doc["bleu"];
      if (b.contains("max_order"))
        c.bleu.max_order = detail::require_uint(b["max_order"], "bleu.max_order");
      if (b.contains("weights")) c.bleu.weights = b["weights"].get<std::vector<double>>();
      if (b.contains("smoothing_epsilon"))
        c.bleu.smoothing_epsilon = b["smoothing_epsilon"].get<double>();
    }
    if (doc.contains("rouge_beta")) c.rouge_beta = doc["rouge_beta"].get<double>();

    if (!doc.contains("metrics") || !doc["metrics"].is_array())
      throw InvalidArgument("config needs a \"metrics\" array");
    for (const auto& m : doc["metrics"]) {
      MetricSpec spec;
      if (m.is_string()) {
        spec.name = m.get<std::string>();
      } else if (m.is_object()) {
        spec.name = m.at("name").get<std::string>();
        if (m.contains("command")) spec.command = m["command"].get<std::vector<std::string>>();
        if (m.contains("timeout_ms"))
          spec.timeout = std::chrono::milliseconds(detail::require_uint(m["timeout_ms"], "timeout_ms"));
      } else {
        throw InvalidArgument("metrics entries must be strings or objects");
      }
      c.metrics.push_back(std::move(spec));
    }

    if (doc.contains("similarity"))
      c.similarity = detail::parse_dataset(doc["similarity"], base_dir, Format::kTsv);
    if (doc.contains("entailment"))
      c.entailment = detail::parse_dataset(doc["entailment"], base_dir, Format::kJsonl);
    if (doc.contains("corruption")) {
      const auto& k = doc["corruption"];
      c.corruption = detail::parse_dataset(k, base_dir, Format::kTsv);
      if (!k.contains("low") || !k.contains("high"))
        throw InvalidArgument("corruption needs \"low\" and \"high\" levels");
      c.corruption_low = detail::parse_corruption_level(k["low"], "low");
      c.corruption_high = detail::parse_corruption_level(k["high"], "high");
      if (c.seed) c.corruption_low.seed = c.corruption_high.seed = *c.seed;
    }
    if (doc.contains("output")) {
      const auto& o = doc["output"];
      if (o.contains("path")) {
        std::filesystem::path p = o["path"].get<std::string>();
        c.output_path = p.is_absolute() ? p : base_dir / p;
      }
      if (o.contains("format"))
        c.output_format = parse_report_format(o["format"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }

  nlohmann::json digest_view = doc;
  digest_view.erase("jobs");
  digest_view.erase("output");
  c.digest = "fnv1a64:" + detail::hex64(fnv1a64(digest_view.dump()));
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("config file not found: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("config " + path.string() + ": " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

/// Builds the registry named by the config. External scorers are not
/// started here.
inline MetricRegistry build_registry(const RunConfig& config) {
  MetricRegistry registry;
  for (const auto& m : config.metrics) {
    if (m.command.empty()) {
      if (!BuiltinMetric::canonical_name(m.name)) {
        std::string known;
        for (const auto& n : BuiltinMetric::names()) known += (known.empty() ? "" : ", ") + n;
        throw InvalidArgument("unknown metric '" + m.name + "' (builtin metrics: " + known +
                              "; external metrics need a \"command\")");
      }
      registry.add(std::make_unique<BuiltinMetric>(m.name, config.tokenizer, config.bleu,
                                                   config.rouge_beta));
    } else {
      registry.add(std::make_unique<ExternalMetric>(
          m.name, m.command, ExternalScorerOptions{m.timeout, 1}));
    }
  }
  return registry;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Loads every configured dataset and runs every configured criterion for
/// every metric in `registry`. External metrics are started first, so a
/// broken scorer fails before any criterion runs. Loader warnings are
/// appended to `warnings` when given.
inline ScorecardReport run_scorecard(const RunConfig& config, MetricRegistry& registry,
                                     std::vector<std::string>* warnings = nullptr) {
  config.validate();
  auto warn = [&](const std::string& file, const std::vector<Diagnostic>& ds) {
    if (warnings == nullptr) return;
    for (const auto& d : ds)
      warnings->push_back(file + (d.line ? ":" + std::to_string(d.line) : "") + ": " + d.message);
  };

  for (Metric* m : registry.all()) m->start();

  ScorecardReport report;
  report.config_digest = config.digest;
  report.seed = config.seed;
  report.tokenizer = config.tokenizer;
  report.generated_at = utc_timestamp();
  const RunOptions options{config.jobs};
  const auto metrics = registry.all();

  if (config.similarity) {
    auto loaded = load_similarity(config.similarity->path, config.similarity->format);
    warn(config.similarity->path.filename().string(), loaded.warnings);
    report.criteria.push_back(run_similarity_criterion(metrics, loaded.records, options));
  }
  if (config.entailment) {
    Loaded<EntailmentTriple> triples;
    if (config.entailment->labeled) {
      std::ifstream in(config.entailment->path, std::ios::binary);
      auto labeled = read_labeled_pairs(in, config.entailment->format);
      warn(config.entailment->path.filename().string(), labeled.warnings);
      triples = group_into_triples(labeled.records);
    } else {
      triples = load_entailment_triples(config.entailment->path, config.entailment->format);
    }
    warn(config.entailment->path.filename().string(), triples.warnings);
    report.criteria.push_back(run_entailment_criterion(metrics, triples.records, options));
  }
  if (config.corruption) {
    auto loaded = load_pairs(config.corruption->path, config.corruption->format);
    warn(config.corruption->path.filename().string(), loaded.warnings);
    auto pairs = std::move(loaded.records);
    if (config.corruption->limit > 0 && pairs.size() > config.corruption->limit)
      pairs.resize(config.corruption->limit);
    const auto triples =
        make_triples(pairs, config.corruption_low, config.corruption_high, config.tokenizer);
    report.criteria.push_back(run_corruption_criterion(metrics, triples, options));
  }

  for (Metric* m : metrics) report.metrics.push_back(m->descriptor());
  return report;
}

}  // namespace evalcard
