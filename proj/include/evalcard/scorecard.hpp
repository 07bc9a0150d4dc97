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

// The metric scorecard: three criteria every reference-based evaluator is
// held to, run uniformly over any Metric.
//
//   similarity_correlation  scores track human 0-5 similarity judgements
//                           (Pearson, Spearman, Kendall tau-b).
//   entailment_ranking      for a premise, entailed > neutral > contradicting
//                           hypotheses (Spearman and tau-b against the gold
//                           ordinal, pooled over triples; mean per-triple
//                           tau-b alongside).
//   corruption_robustness   eval(r, h) > eval(r, corrupt(h)) >
//                           eval(r, corrupt_more(h)); reports the fraction
//                           of triples obeying the strict chain and rank
//                           correlations against the negated corruption
//                           level.
//
// Undefined statistics are carried with their reason instead of a number.

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "evalcard/corruption.hpp"
#include "evalcard/datasets.hpp"
#include "evalcard/error.hpp"
#include "evalcard/rng.hpp"
#include "evalcard/scorer_bridge.hpp"
#include "evalcard/stats.hpp"
#include "evalcard/text_core.hpp"

namespace evalcard {

inline constexpr const char* kReportSchema = "scorecard/1";

enum class Criterion {
  kSimilarityCorrelation,
  kEntailmentRanking,
  kCorruptionRobustness
};

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::kSimilarityCorrelation: return "similarity_correlation";
    case Criterion::kEntailmentRanking: return "entailment_ranking";
    case Criterion::kCorruptionRobustness: return "corruption_robustness";
  }
  return "?";
}

/// One named statistic: a value, or the reason it is undefined.
struct Statistic {
  std::string name;
  std::optional<double> value;
  std::string undefined_reason;

  bool defined() const { return value.has_value(); }
};

struct MetricCriterionResult {
  std::string metric;
  /// Units that entered the statistics (pairs, or triples for criteria 2-3).
  std::size_t sample_count = 0;
  /// Units dropped because at least one of their scores failed.
  std::size_t failed_count = 0;
  std::vector<Statistic> statistics;
  /// Criterion 3 only: fraction of triples with a strictly decreasing chain.
  std::optional<double> monotonicity_rate;
  /// Criterion 2 only: mean tau-b within each triple, over triples where it
  /// is defined, and how many triples were not.
  std::optional<double> mean_triple_kendall;
  std::size_t undefined_triples = 0;
  std::vector<std::string> degenerate_flags;
  /// First few scoring errors, for diagnosis.
  std::vector<std::string> errors;

  const Statistic* find(std::string_view name) const {
    for (const auto& s : statistics)
      if (s.name == name) return &s;
    return nullptr;
  }

  /// Value of a statistic; throws if it is missing or undefined.
  double value(std::string_view name) const {
    const auto* s = find(name);
    if (s == nullptr || !s->defined())
      throw InvalidArgument("statistic " + std::string(name) + " is undefined for " + metric);
    return *s->value;
  }

  bool has_flag(std::string_view flag) const {
    for (const auto& f : degenerate_flags)
      if (f == flag) return true;
    return false;
  }
};

struct CriterionResult {
  Criterion criterion = Criterion::kSimilarityCorrelation;
  /// Input units (pairs or triples) offered to every metric.
  std::size_t sample_count = 0;
  /// What the statistics correlate, recorded in the report.
  std::string definition;
  std::vector<MetricCriterionResult> metrics;

  const MetricCriterionResult& for_metric(std::string_view name) const {
    for (const auto& m : metrics)
      if (m.metric == name) return m;
    throw InvalidArgument("no result for metric " + std::string(name));
  }
};

struct RunOptions {
  unsigned jobs = 1;
};

namespace detail {

inline constexpr std::size_t kMaxReportedErrors = 3;

inline void note_error(MetricCriterionResult& r, const ScoreResult& s) {
  if (r.errors.size() < kMaxReportedErrors) r.errors.push_back(s.error);
}

inline std::string degenerate_flag(const UndefinedCorrelation& e) {
  switch (e.side()) {
    case DegenerateSide::kX: return "constant_gold";
    case DegenerateSide::kY: return "constant_metric";
    case DegenerateSide::kBoth: return "constant_gold_and_metric";
  }
  return "undefined";
}

// Computes `fn` on (gold, scores) and records either its value or why it is
// undefined. gold is the x side, metric scores the y side.
template <class Fn>
void add_statistic(MetricCriterionResult& r, const std::string& name,
                   const std::vector<double>& gold,
                   const std::vector<double>& scores, Fn fn) {
  Statistic s{name, std::nullopt, {}};
  if (gold.size() < 2) {
    s.undefined_reason = "fewer than 2 samples";
    if (!r.has_flag("too_few_samples")) r.degenerate_flags.push_back("too_few_samples");
  } else {
    try {
      s.value = fn(PairedSamples(gold, scores));
    } catch (const UndefinedCorrelation& e) {
      s.undefined_reason = e.what();
      const auto flag = degenerate_flag(e);
      if (!r.has_flag(flag)) r.degenerate_flags.push_back(flag);
    }
  }
  r.statistics.push_back(std::move(s));
}

}  // namespace detail

/// Criterion 1. Needs at least two records with non-constant human scores.
inline CriterionResult run_similarity_criterion(
    const std::vector<Metric*>& metrics,
    const std::vector<SimilarityRecord>& records, const RunOptions& options = {}) {
  if (records.size() < 2)
    throw InvalidArgument("similarity criterion needs at least 2 records");
  const bool constant_gold = std::all_of(records.begin(), records.end(), [&](const auto& r) {
    return r.human_score == records.front().human_score;
  });
  if (constant_gold)
    throw InvalidArgument("similarity criterion needs non-constant human scores");

  CriterionResult out;
  out.criterion = Criterion::kSimilarityCorrelation;
  out.sample_count = records.size();
  out.definition = "correlation between metric score and human similarity (0-5)";

  std::vector<SentencePair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) pairs.push_back(r.pair);

  for (Metric* metric : metrics) {
    MetricCriterionResult r;
    r.metric = metric->descriptor().name;
    const auto scored = score_batch(*metric, pairs, options.jobs);
    std::vector<double> gold, scores;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (!scored[i].ok()) {
        ++r.failed_count;
        detail::note_error(r, scored[i]);
        continue;
      }
      gold.push_back(records[i].human_score);
      scores.push_back(scored[i].score->value);
    }
    r.sample_count = gold.size();
    if (r.failed_count > 0) r.degenerate_flags.push_back("scoring_errors");
    detail::add_statistic(r, "pearson", gold, scores, [](const auto& s) { return pearson(s); });
    detail::add_statistic(r, "spearman", gold, scores, [](const auto& s) { return spearman(s); });
    detail::add_statistic(r, "kendall_tau_b", gold, scores,
                          [](const auto& s) { return kendall_tau_b(s); });
    out.metrics.push_back(std::move(r));
  }
  return out;
}

/// Criterion 2.
inline CriterionResult run_entailment_criterion(
    const std::vector<Metric*>& metrics,
    const std::vector<EntailmentTriple>& triples, const RunOptions& options = {}) {
  if (triples.empty())
    throw InvalidArgument("entailment criterion needs at least 1 triple");

  constexpr EntailmentLabel kOrder[] = {EntailmentLabel::kEntailment,
                                        EntailmentLabel::kNeutral,
                                        EntailmentLabel::kContradiction};
  CriterionResult out;
  out.criterion = Criterion::kEntailmentRanking;
  out.sample_count = triples.size();
  out.definition =
      "rank correlation between metric score of (premise, hypothesis) and gold "
      "ordinal entailment=2, neutral=1, contradiction=0; pooled over triples";

  std::vector<SentencePair> pairs;
  pairs.reserve(3 * triples.size());
  for (const auto& t : triples)
    for (auto label : kOrder)
      pairs.push_back({t.id + "/" + std::to_string(gold_ordinal(label)), t.premise,
                       t.hypothesis(label)});

  for (Metric* metric : metrics) {
    MetricCriterionResult r;
    r.metric = metric->descriptor().name;
    const auto scored = score_batch(*metric, pairs, options.jobs);
    std::vector<double> gold, scores;
    double triple_tau_sum = 0.0;
    std::size_t triple_tau_count = 0;
    for (std::size_t t = 0; t < triples.size(); ++t) {
      bool ok = true;
      for (std::size_t k = 0; k < 3; ++k) {
        if (!scored[3 * t + k].ok()) {
          if (ok) detail::note_error(r, scored[3 * t + k]);
          ok = false;
        }
      }
      if (!ok) {
        ++r.failed_count;
        continue;
      }
      std::vector<double> g, s;
      for (std::size_t k = 0; k < 3; ++k) {
        g.push_back(gold_ordinal(kOrder[k]));
        s.push_back(scored[3 * t + k].score->value);
      }
      gold.insert(gold.end(), g.begin(), g.end());
      scores.insert(scores.end(), s.begin(), s.end());
      try {
        triple_tau_sum += kendall_tau_b(PairedSamples(g, s));
        ++triple_tau_count;
      } catch (const UndefinedCorrelation&) {
        ++r.undefined_triples;
      }
    }
    r.sample_count = gold.size() / 3;
    if (r.failed_count > 0) r.degenerate_flags.push_back("scoring_errors");
    detail::add_statistic(r, "spearman", gold, scores, [](const auto& s) { return spearman(s); });
    detail::add_statistic(r, "kendall_tau_b", gold, scores,
                          [](const auto& s) { return kendall_tau_b(s); });
    if (triple_tau_count > 0)
      r.mean_triple_kendall = triple_tau_sum / static_cast<double>(triple_tau_count);
    out.metrics.push_back(std::move(r));
  }
  return out;
}

/// Criterion 3. Ties break the chain.
inline CriterionResult run_corruption_criterion(
    const std::vector<Metric*>& metrics,
    const std::vector<CorruptionTriple>& triples, const RunOptions& options = {}) {
  if (triples.empty())
    throw InvalidArgument("corruption criterion needs at least 1 triple");

  CriterionResult out;
  out.criterion = Criterion::kCorruptionRobustness;
  out.sample_count = triples.size();
  out.definition =
      "monotonicity: fraction of triples with eval(orig) > eval(corrupted) > "
      "eval(more corrupted); correlations: metric score vs negated corruption "
      "rank (0 original, -1 corrupted, -2 more corrupted), pooled";

  std::vector<SentencePair> pairs;
  pairs.reserve(3 * triples.size());
  for (const auto& t : triples) {
    pairs.push_back(t.original);
    pairs.push_back(t.corrupted);
    pairs.push_back(t.more_corrupted);
  }

  for (Metric* metric : metrics) {
    MetricCriterionResult r;
    r.metric = metric->descriptor().name;
    const auto scored = score_batch(*metric, pairs, options.jobs);
    std::vector<double> gold, scores;
    std::size_t monotone = 0;
    for (std::size_t t = 0; t < triples.size(); ++t) {
      bool ok = true;
      for (std::size_t k = 0; k < 3; ++k) {
        if (!scored[3 * t + k].ok()) {
          if (ok) detail::note_error(r, scored[3 * t + k]);
          ok = false;
        }
      }
      if (!ok) {
        ++r.failed_count;
        continue;
      }
      const double s0 = scored[3 * t].score->value;
      const double s1 = scored[3 * t + 1].score->value;
      const double s2 = scored[3 * t + 2].score->value;
      if (s0 > s1 && s1 > s2) ++monotone;
      for (std::size_t k = 0; k < 3; ++k) {
        gold.push_back(-static_cast<double>(k));
        scores.push_back(scored[3 * t + k].score->value);
      }
    }
    r.sample_count = gold.size() / 3;
    if (r.failed_count > 0) r.degenerate_flags.push_back("scoring_errors");
    if (r.sample_count > 0)
      r.monotonicity_rate =
          static_cast<double>(monotone) / static_cast<double>(r.sample_count);
    detail::add_statistic(r, "spearman", gold, scores, [](const auto& s) { return spearman(s); });
    detail::add_statistic(r, "kendall_tau_b", gold, scores,
                          [](const auto& s) { return kendall_tau_b(s); });
    out.metrics.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct ScorecardReport {
  /// Digest of the run configuration that produced the report.
  std::string config_digest;
  std::optional<std::uint64_t> seed;
  TokenizerConfig tokenizer;
  std::vector<MetricDescriptor> metrics;
  std::vector<CriterionResult> criteria;
  /// Wall-clock stamp; kept outside the reproducible body.
  std::string generated_at;
};

enum class ReportFormat { kJson, kMarkdown };

inline ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  throw InvalidArgument("unknown report format '" + std::string(name) +
                        "' (expected json or markdown)");
}

namespace detail {

inline nlohmann::ordered_json to_json(const MetricCriterionResult& r) {
  nlohmann::ordered_json j;
  j["metric"] = r.metric;
  j["sample_count"] = r.sample_count;
  j["failed_count"] = r.failed_count;
  nlohmann::ordered_json stats = nlohmann::ordered_json::object();
  nlohmann::ordered_json undefined = nlohmann::ordered_json::object();
  for (const auto& s : r.statistics) {
    if (s.defined()) {
      stats[s.name] = *s.value;
    } else {
      stats[s.name] = nullptr;
      undefined[s.name] = s.undefined_reason;
    }
  }
  j["statistics"] = stats;
  if (!undefined.empty()) j["undefined"] = undefined;
  if (r.monotonicity_rate) j["monotonicity_rate"] = *r.monotonicity_rate;
  if (r.mean_triple_kendall || r.undefined_triples > 0) {
    j["mean_triple_kendall"] =
        r.mean_triple_kendall ? nlohmann::ordered_json(*r.mean_triple_kendall)
                              : nlohmann::ordered_json(nullptr);
    j["undefined_triples"] = r.undefined_triples;
  }
  j["degenerate_flags"] = r.degenerate_flags;
  if (!r.errors.empty()) j["errors"] = r.errors;
  return j;
}

inline std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

inline std::string cell(const MetricCriterionResult& r, const std::string& name) {
  const auto* s = r.find(name);
  if (s == nullptr) return "";
  if (s->defined()) return fixed(*s->value);
  return "undefined";
}

}  // namespace detail

/// The reproducible part of the report: identical configuration, seed and
/// inputs give an identical body, independent of --jobs.
inline nlohmann::ordered_json report_body(const ScorecardReport& report) {
  nlohmann::ordered_json body;
  body["config_digest"] = report.config_digest;
  body["seed"] = report.seed ? nlohmann::ordered_json(*report.seed)
                             : nlohmann::ordered_json(nullptr);
  body["tokenizer"] = {{"lowercase", report.tokenizer.lowercase},
                       {"stem", report.tokenizer.stem},
                       {"remove_stopwords", report.tokenizer.remove_stopwords}};
  nlohmann::ordered_json metrics = nlohmann::ordered_json::array();
  for (const auto& m : report.metrics) {
    nlohmann::ordered_json j;
    j["name"] = m.name;
    j["kind"] = to_string(m.kind);
    j["range"] = {m.range.lo, m.range.hi};
    j["orientation"] = m.orientation;
    if (!m.command.empty()) j["command"] = m.command;
    metrics.push_back(j);
  }
  body["metrics"] = metrics;
  nlohmann::ordered_json criteria = nlohmann::ordered_json::array();
  for (const auto& c : report.criteria) {
    nlohmann::ordered_json j;
    j["criterion"] = to_string(c.criterion);
    j["definition"] = c.definition;
    j["sample_count"] = c.sample_count;
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& r : c.metrics) results.push_back(detail::to_json(r));
    j["results"] = results;
    criteria.push_back(j);
  }
  body["criteria"] = criteria;
  return body;
}

/// Renders the report. JSON nests the reproducible body under "body" next to
/// the schema tag and timestamp. Markdown renders one table per criterion
/// with metrics as columns.
inline std::string emit_report(const ScorecardReport& report, ReportFormat format) {
  if (report.metrics.empty()) throw InvalidArgument("report needs at least 1 metric");
  if (report.criteria.empty()) throw InvalidArgument("report needs at least 1 criterion");

  if (format == ReportFormat::kJson) {
    nlohmann::ordered_json doc;
    doc["schema"] = kReportSchema;
    doc["generated_at"] = report.generated_at;
    doc["body"] = report_body(report);
    return doc.dump(2) + "\n";
  }

  std::ostringstream md;
  md << "# Metric scorecard\n\n";
  md << "Config digest: `" << report.config_digest << "`";
  if (report.seed) md << ", seed " << *report.seed;
  md << "\n";
  for (const auto& c : report.criteria) {
    md << "\n## " << to_string(c.criterion) << "\n\n";
    md << c.definition << ". " << c.sample_count << " input units.\n\n";
    md << "|";
    for (const auto& r : c.metrics) md << " | " << r.metric;
    md << " |\n|---";
    for (std::size_t i = 0; i < c.metrics.size(); ++i) md << "|---";
    md << "|\n";

    std::vector<std::string> rows;
    for (const auto& r : c.metrics)
      for (const auto& s : r.statistics)
        if (std::find(rows.begin(), rows.end(), s.name) == rows.end())
          rows.push_back(s.name);
    for (const auto& row : rows) {
      md << "| " << row;
      for (const auto& r : c.metrics) md << " | " << detail::cell(r, row);
      md << " |\n";
    }
    if (c.criterion == Criterion::kCorruptionRobustness) {
      md << "| monotonicity_rate";
      for (const auto& r : c.metrics)
        md << " | " << (r.monotonicity_rate ? detail::fixed(*r.monotonicity_rate) : "");
      md << " |\n";
    }
    if (c.criterion == Criterion::kEntailmentRanking) {
      md << "| mean_triple_kendall";
      for (const auto& r : c.metrics)
        md << " | " << (r.mean_triple_kendall ? detail::fixed(*r.mean_triple_kendall) : "undefined");
      md << " |\n";
    }
    md << "| samples";
    for (const auto& r : c.metrics) md << " | " << r.sample_count;
    md << " |\n";

    bool any_flags = false;
    for (const auto& r : c.metrics) any_flags |= !r.degenerate_flags.empty();
    if (any_flags) {
      md << "\nDegenerate:";
      for (const auto& r : c.metrics) {
        if (r.degenerate_flags.empty()) continue;
        md << " " << r.metric << " (";
        for (std::size_t i = 0; i < r.degenerate_flags.size(); ++i)
          md << (i ? ", " : "") << r.degenerate_flags[i];
        md << ")";
      }
      md << "\n";
    }
  }
  return md.str();
}

}  // namespace evalcard
