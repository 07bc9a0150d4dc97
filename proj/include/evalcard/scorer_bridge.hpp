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

// Uniform metric interface for builtin and out-of-process scorers.
//
// External scorers speak protocol "scorer/1": newline-delimited UTF-8 JSON
// over the child's stdin/stdout.
//
//   scorer -> bridge, once at startup:
//     {"protocol":"scorer/1","name":"<name>","range":[lo,hi]}
//   bridge -> scorer, one per pair:
//     {"id":"<id>","ref":"<reference>","hyp":"<hypothesis>"}
//   scorer -> bridge, one per request, in any order:
//     {"id":"<id>","score":<number>}   or   {"id":"<id>","error":"<text>"}
//
// The bridge enforces the declared range and finiteness of every score,
// reconciles responses by id, restarts a crashed scorer once and fails every
// later request after a second crash.

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "evalcard/datasets.hpp"
#include "evalcard/error.hpp"
#include "evalcard/ngram_metrics.hpp"
#include "evalcard/subprocess.hpp"
#include "evalcard/text_core.hpp"

namespace evalcard {

inline constexpr const char* kScorerProtocol = "scorer/1";

enum class MetricKind { kBuiltin, kExternal };

inline const char* to_string(MetricKind kind) {
  return kind == MetricKind::kBuiltin ? "builtin" : "external";
}

struct MetricDescriptor {
  std::string name;
  MetricKind kind = MetricKind::kBuiltin;
  ScoreRange range;
  /// Always "similarity": higher means more similar.
  std::string orientation = "similarity";
  /// Launch command of an external scorer (program followed by arguments).
  std::vector<std::string> command;
};

enum class ScoreErrorKind { kNone, kTimeout, kProtocol, kUnavailable, kScorer };

inline const char* to_string(ScoreErrorKind kind) {
  switch (kind) {
    case ScoreErrorKind::kNone: return "none";
    case ScoreErrorKind::kTimeout: return "timeout";
    case ScoreErrorKind::kProtocol: return "protocol_violation";
    case ScoreErrorKind::kUnavailable: return "scorer_unavailable";
    case ScoreErrorKind::kScorer: return "scorer_error";
  }
  return "?";
}

/// Outcome of scoring one pair inside a batch: a score or an error record
/// occupying the pair's slot.
struct ScoreResult {
  std::optional<MetricScore> score;
  ScoreErrorKind error_kind = ScoreErrorKind::kNone;
  std::string error;

  bool ok() const { return score.has_value(); }

  static ScoreResult failure(ScoreErrorKind kind, std::string message) {
    ScoreResult r;
    r.error_kind = kind;
    r.error = std::move(message);
    return r;
  }
};

/// Throws the exception type matching a failed result.
inline void rethrow(const ScoreResult& r) {
  switch (r.error_kind) {
    case ScoreErrorKind::kTimeout: throw ScorerTimeout(r.error);
    case ScoreErrorKind::kProtocol: throw ProtocolViolation(r.error);
    case ScoreErrorKind::kUnavailable: throw ScorerUnavailable(r.error);
    default: throw ScorerError(r.error);
  }
}

class Metric {
 public:
  virtual ~Metric() = default;

  virtual const MetricDescriptor& descriptor() const = 0;

  /// Raw score for one pair; range checking happens in score_pair().
  virtual double raw_score(const SentencePair& pair) = 0;

  /// Raw results for a batch, order-preserving. The default scores pairs one
  /// by one and turns exceptions into per-slot errors.
  virtual std::vector<ScoreResult> raw_batch(std::span<const SentencePair> pairs);

  /// True when raw_score may be called concurrently from several threads.
  virtual bool parallel_safe() const { return false; }

  /// Starts any backing process. A no-op for in-process metrics.
  virtual void start() {}
};

namespace detail {

inline ScoreResult checked(const MetricDescriptor& d, double value) {
  if (!std::isfinite(value))
    return ScoreResult::failure(ScoreErrorKind::kProtocol,
                                d.name + ": non-finite score");
  if (!d.range.contains(value))
    return ScoreResult::failure(
        ScoreErrorKind::kProtocol,
        d.name + ": score " + format_score(value) + " outside declared range [" +
            format_score(d.range.lo) + ", " + format_score(d.range.hi) + "]");
  ScoreResult r;
  r.score = MetricScore{d.name, value, d.range, false};
  return r;
}

inline ScoreResult guarded(const MetricDescriptor& d,
                           const std::function<double()>& fn) {
  try {
    return checked(d, fn());
  } catch (const ScorerTimeout& e) {
    return ScoreResult::failure(ScoreErrorKind::kTimeout, e.what());
  } catch (const ProtocolViolation& e) {
    return ScoreResult::failure(ScoreErrorKind::kProtocol, e.what());
  } catch (const ScorerUnavailable& e) {
    return ScoreResult::failure(ScoreErrorKind::kUnavailable, e.what());
  } catch (const std::exception& e) {
    return ScoreResult::failure(ScoreErrorKind::kScorer, e.what());
  }
}

}  // namespace detail

inline std::vector<ScoreResult> Metric::raw_batch(
    std::span<const SentencePair> pairs) {
  std::vector<ScoreResult> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs)
    out.push_back(detail::guarded(descriptor(), [&] { return raw_score(p); }));
  return out;
}

/// Scores one pair. Throws ScorerTimeout, ProtocolViolation (out-of-range or
/// non-finite score, mismatched id) or ScorerUnavailable.
inline MetricScore score_pair(Metric& metric, const SentencePair& pair) {
  auto results = metric.raw_batch(std::span<const SentencePair>(&pair, 1));
  ScoreResult r = std::move(results.at(0));
  if (r.ok()) r = detail::checked(metric.descriptor(), r.score->value);
  if (!r.ok()) rethrow(r);
  return *r.score;
}

/// Scores pairs in order. Output length always equals input length; failed
/// pairs carry an error in their slot. Parallel-safe metrics are spread over
/// `jobs` threads; the result does not depend on `jobs`.
inline std::vector<ScoreResult> score_batch(Metric& metric,
                                            std::span<const SentencePair> pairs,
                                            unsigned jobs = 1) {
  const auto& d = metric.descriptor();
  std::vector<ScoreResult> out;
  if (pairs.empty()) return out;

  if (jobs <= 1 || !metric.parallel_safe() || pairs.size() < 2 * jobs) {
    out = metric.raw_batch(pairs);
  } else {
    out.resize(pairs.size());
    std::vector<std::thread> workers;
    const std::size_t chunk = (pairs.size() + jobs - 1) / jobs;
    for (std::size_t start = 0; start < pairs.size(); start += chunk) {
      const std::size_t end = std::min(pairs.size(), start + chunk);
      workers.emplace_back([&, start, end] {
        for (std::size_t i = start; i < end; ++i)
          out[i] = detail::guarded(d, [&] { return metric.raw_score(pairs[i]); });
      });
    }
    for (auto& w : workers) w.join();
  }
  if (out.size() != pairs.size())
    throw ProtocolViolation(d.name + ": batch result has wrong length");
  for (auto& r : out)
    if (r.ok()) r = detail::checked(d, r.score->value);
  return out;
}

// ---------------------------------------------------------------------------
// Builtin n-gram metrics

/// "bleu", "rouge1", "rouge2" or "rougeL" over tokenized text. (R, P, F)
/// metrics report their F-score.
class BuiltinMetric : public Metric {
 public:
  static std::vector<std::string> names() {
    return {"bleu", "rouge1", "rouge2", "rougeL"};
  }

  /// Canonical spelling of a builtin id (case-insensitive), or nullopt.
  static std::optional<std::string> canonical_name(std::string_view id) {
    std::string lower(id);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    for (const auto& n : names()) {
      std::string ln = n;
      std::transform(ln.begin(), ln.end(), ln.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (ln == lower) return n;
    }
    return std::nullopt;
  }

  explicit BuiltinMetric(std::string_view id, TokenizerConfig tokenizer = {},
                         BleuConfig bleu = {}, double beta = 1.0)
      : tokenizer_(tokenizer), bleu_(std::move(bleu)), beta_(beta) {
    auto name = canonical_name(id);
    if (!name) throw InvalidArgument("unknown builtin metric '" + std::string(id) + "'");
    bleu_.validate();
    RougeConfig{RougeVariant::kN, 1, beta_}.validate();
    descriptor_.name = *name;
    descriptor_.kind = MetricKind::kBuiltin;
    descriptor_.range = {0.0, 1.0};
  }

  const MetricDescriptor& descriptor() const override { return descriptor_; }
  bool parallel_safe() const override { return true; }

  double raw_score(const SentencePair& pair) override {
    const auto ref = tokenize(pair.reference, tokenizer_);
    const auto hyp = tokenize(pair.hypothesis, tokenizer_);
    const auto& n = descriptor_.name;
    if (n == "bleu") return bleu(ref, hyp, bleu_).value;
    if (n == "rouge1") return rouge_n(ref, hyp, 1, beta_).f_score;
    if (n == "rouge2") return rouge_n(ref, hyp, 2, beta_).f_score;
    return rouge_l(ref, hyp, beta_).f_score;
  }

 private:
  MetricDescriptor descriptor_;
  TokenizerConfig tokenizer_;
  BleuConfig bleu_;
  double beta_;
};

/// An in-process metric backed by a callable; used for oracle and synthetic
/// metrics.
class FunctionMetric : public Metric {
 public:
  using Fn = std::function<double(const SentencePair&)>;

  FunctionMetric(std::string name, ScoreRange range, Fn fn,
                 bool parallel_safe = false)
      : fn_(std::move(fn)), parallel_safe_(parallel_safe) {
    descriptor_.name = std::move(name);
    descriptor_.kind = MetricKind::kBuiltin;
    descriptor_.range = range;
  }

  const MetricDescriptor& descriptor() const override { return descriptor_; }
  bool parallel_safe() const override { return parallel_safe_; }
  double raw_score(const SentencePair& pair) override { return fn_(pair); }

 private:
  MetricDescriptor descriptor_;
  Fn fn_;
  bool parallel_safe_;
};

// ---------------------------------------------------------------------------
// External scorers

struct ExternalScorerOptions {
  std::chrono::milliseconds timeout{30000};
  /// Restarts allowed after a crash before the scorer is declared dead.
  int max_restarts = 1;
};

class ExternalMetric : public Metric {
 public:
  /// `name` is the registry name; the handshake may report its own.
  ExternalMetric(std::string name, std::vector<std::string> command,
                 ExternalScorerOptions options = {})
      : options_(options) {
    if (command.empty())
      throw InvalidArgument("external metric '" + name + "' needs a command");
    descriptor_.name = std::move(name);
    descriptor_.kind = MetricKind::kExternal;
    descriptor_.command = std::move(command);
  }

  ~ExternalMetric() override { child_.terminate(); }

  const MetricDescriptor& descriptor() const override { return descriptor_; }

  /// Launches the scorer and validates its handshake. Throws
  /// ScorerUnavailable, ScorerTimeout or ProtocolViolation.
  void start() override {
    if (child_.running()) return;
    if (dead_) throw ScorerUnavailable(descriptor_.name + ": " + dead_reason_);
    launch();
  }

  /// Name and range announced in the handshake.
  const std::string& announced_name() const { return announced_name_; }

  double raw_score(const SentencePair& pair) override {
    auto r = raw_batch(std::span<const SentencePair>(&pair, 1));
    if (!r[0].ok()) rethrow(r[0]);
    return r[0].score->value;
  }

  std::vector<ScoreResult> raw_batch(std::span<const SentencePair> pairs) override {
    std::vector<ScoreResult> out(pairs.size());
    std::vector<std::size_t> pending(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) pending[i] = i;

    while (!pending.empty()) {
      if (dead_) {
        for (auto i : pending)
          out[i] = ScoreResult::failure(ScoreErrorKind::kUnavailable,
                                        descriptor_.name + ": " + dead_reason_);
        break;
      }
      try {
        start();
      } catch (const ScorerError& e) {
        mark_crashed(e.what());
        continue;
      }
      pending = exchange(pairs, pending, out);
    }
    return out;
  }

 private:
  void launch() {
    child_.spawn(descriptor_.command);
    std::string line;
    const auto status = child_.read_line(
        line, ChildProcess::Clock::now() + options_.timeout);
    if (status != ChildProcess::ReadStatus::kLine) {
      const bool timed_out = status == ChildProcess::ReadStatus::kTimeout;
      const std::string err = child_.stderr_text();
      child_.terminate();
      const std::string msg = descriptor_.name +
                              (timed_out ? ": no handshake within timeout"
                                         : ": scorer exited before handshake") +
                              (err.empty() ? "" : "; stderr: " + err);
      if (timed_out) throw ScorerTimeout(msg);
      throw ScorerUnavailable(msg);
    }
    nlohmann::json hs;
    try {
      hs = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      child_.terminate();
      throw ProtocolViolation(descriptor_.name + ": malformed handshake: " + line);
    }
    if (!hs.is_object() || hs.value("protocol", "") != kScorerProtocol ||
        !hs.contains("name") || !hs["name"].is_string() || !hs.contains("range") ||
        !hs["range"].is_array() || hs["range"].size() != 2 ||
        !hs["range"][0].is_number() || !hs["range"][1].is_number()) {
      child_.terminate();
      throw ProtocolViolation(descriptor_.name + ": bad handshake: " + line);
    }
    ScoreRange range{hs["range"][0].get<double>(), hs["range"][1].get<double>()};
    if (!(range.lo < range.hi) || !std::isfinite(range.lo) ||
        !std::isfinite(range.hi)) {
      child_.terminate();
      throw ProtocolViolation(descriptor_.name + ": bad handshake range: " + line);
    }
    announced_name_ = hs["name"].get<std::string>();
    descriptor_.range = range;
  }

  void mark_crashed(const std::string& reason) {
    child_.terminate();
    ++crashes_;
    if (crashes_ > options_.max_restarts) {
      dead_ = true;
      dead_reason_ = reason;
    }
  }

  // Sends the pending requests and reads responses. Returns the indices that
  // still need an answer because the scorer crashed.
  std::vector<std::size_t> exchange(std::span<const SentencePair> pairs,
                                    const std::vector<std::size_t>& pending,
                                    std::vector<ScoreResult>& out) {
    std::map<std::string, std::size_t> by_id;
    std::vector<std::string> lines;
    lines.reserve(pending.size());
    for (auto i : pending) {
      const std::string id = std::to_string(next_request_id_++);
      by_id.emplace(id, i);
      nlohmann::ordered_json req;
      req["id"] = id;
      req["ref"] = pairs[i].reference;
      req["hyp"] = pairs[i].hypothesis;
      lines.push_back(req.dump());
    }

    std::thread writer([this, &lines] {
      for (const auto& l : lines)
        if (!child_.write_line(l)) return;
    });

    std::string fatal;
    ScoreErrorKind fatal_kind = ScoreErrorKind::kNone;
    bool crashed = false;
    while (!by_id.empty()) {
      std::string line;
      const auto status = child_.read_line(
          line, ChildProcess::Clock::now() + options_.timeout);
      if (status == ChildProcess::ReadStatus::kTimeout) {
        fatal_kind = ScoreErrorKind::kTimeout;
        fatal = descriptor_.name + ": no response within " +
                std::to_string(options_.timeout.count()) + " ms";
        break;
      }
      if (status == ChildProcess::ReadStatus::kEof) {
        crashed = true;
        break;
      }
      nlohmann::json resp;
      try {
        resp = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        fatal_kind = ScoreErrorKind::kProtocol;
        fatal = descriptor_.name + ": malformed response: " + line;
        break;
      }
      const auto id_it = resp.is_object() ? resp.find("id") : resp.end();
      if (id_it == resp.end() || !id_it->is_string() ||
          !by_id.contains(id_it->get<std::string>())) {
        fatal_kind = ScoreErrorKind::kProtocol;
        fatal = descriptor_.name + ": response with unknown or mismatched id: " + line;
        break;
      }
      const auto it = by_id.find(id_it->get<std::string>());
      const std::size_t slot = it->second;
      by_id.erase(it);
      if (resp.contains("error")) {
        out[slot] = ScoreResult::failure(
            ScoreErrorKind::kScorer,
            descriptor_.name + ": " +
                (resp["error"].is_string() ? resp["error"].get<std::string>()
                                           : resp["error"].dump()));
      } else if (resp.contains("score") && resp["score"].is_number()) {
        out[slot] = detail::checked(descriptor_, resp["score"].get<double>());
      } else {
        out[slot] = ScoreResult::failure(
            ScoreErrorKind::kProtocol,
            descriptor_.name + ": response has neither score nor error: " + line);
      }
    }

    if (crashed || fatal_kind != ScoreErrorKind::kNone) {
      // Unblock a writer stuck on a full pipe before joining it.
      child_.kill();
    }
    writer.join();

    std::vector<std::size_t> retry;
    if (crashed) {
      const std::string err = child_.stderr_text();
      mark_crashed("scorer process exited" +
                   (err.empty() ? std::string() : "; stderr: " + err));
      for (const auto& [id, slot] : by_id) retry.push_back(slot);
      std::sort(retry.begin(), retry.end());
    } else if (fatal_kind != ScoreErrorKind::kNone) {
      // The stream is out of sync; the next batch starts a fresh process.
      child_.terminate();
      for (const auto& [id, slot] : by_id)
        out[slot] = ScoreResult::failure(fatal_kind, fatal);
    }
    return retry;
  }

  MetricDescriptor descriptor_;
  ExternalScorerOptions options_;
  ChildProcess child_;
  std::string announced_name_;
  std::uint64_t next_request_id_ = 0;
  int crashes_ = 0;
  bool dead_ = false;
  std::string dead_reason_;
};

// ---------------------------------------------------------------------------
// Registry

/// Named metrics, unique by name (builtin ids compare case-insensitively).
/// Populate it up front, then treat it as read-only.
class MetricRegistry {
 public:
  Metric& add(std::unique_ptr<Metric> metric) {
    const auto& name = metric->descriptor().name;
    if (find(name) != nullptr)
      throw InvalidArgument("metric '" + name + "' registered twice");
    metrics_.push_back(std::move(metric));
    return *metrics_.back();
  }

  Metric* find(std::string_view name) const {
    const auto canonical = BuiltinMetric::canonical_name(name);
    for (const auto& m : metrics_) {
      const auto& n = m->descriptor().name;
      if (n == name || (canonical && n == *canonical)) return m.get();
    }
    return nullptr;
  }

  Metric& at(std::string_view name) const {
    if (auto* m = find(name)) return *m;
    throw InvalidArgument("unknown metric '" + std::string(name) + "'");
  }

  std::vector<Metric*> all() const {
    std::vector<Metric*> out;
    for (const auto& m : metrics_) out.push_back(m.get());
    return out;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& m : metrics_) out.push_back(m->descriptor().name);
    return out;
  }

  std::size_t size() const { return metrics_.size(); }

  /// A registry holding the four builtin metrics.
  static MetricRegistry with_builtins(const TokenizerConfig& tokenizer = {}) {
    MetricRegistry r;
    for (const auto& n : BuiltinMetric::names())
      r.add(std::make_unique<BuiltinMetric>(n, tokenizer));
    return r;
  }

 private:
  std::vector<std::unique_ptr<Metric>> metrics_;
};

}  // namespace evalcard
