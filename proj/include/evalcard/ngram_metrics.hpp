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

// BLEU (sentence and corpus level), ROUGE-N and ROUGE-L.
//
// The core routines are templates over any totally ordered token type so
// that the same code scores string tokens and the small integer alphabets
// used by the exhaustive tests. All scores are similarity-oriented: higher
// means more similar.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evalcard/error.hpp"
#include "evalcard/text_core.hpp"

namespace evalcard {

struct ScoreRange {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const ScoreRange&, const ScoreRange&) = default;
};

/// A named metric's value for one (reference, hypothesis) pair.
struct MetricScore {
  std::string metric_name;
  double value = 0.0;
  ScoreRange range;
  /// Set when the inputs made the score degenerate (e.g. an empty side).
  bool degenerate = false;
};

struct BleuConfig {
  std::size_t max_order = 4;
  /// Per-order weights; empty means uniform 1/max_order.
  std::vector<double> weights;
  /// Numerator substituted for a zero clipped-match count.
  double smoothing_epsilon = 0.01;

  std::vector<double> effective_weights() const {
    if (!weights.empty()) return weights;
    return std::vector<double>(max_order, 1.0 / static_cast<double>(max_order));
  }

  void validate() const {
    if (max_order < 1 || max_order > 9)
      throw InvalidArgument("BLEU max_order must be in [1, 9]");
    const auto w = effective_weights();
    if (w.size() != max_order)
      throw InvalidArgument("BLEU needs exactly max_order weights");
    double sum = 0.0;
    for (double x : w) {
      if (!(x >= 0.0)) throw InvalidArgument("BLEU weights must be >= 0");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw InvalidArgument("BLEU weights must sum to 1");
    if (!(smoothing_epsilon > 0.0) || !std::isfinite(smoothing_epsilon))
      throw InvalidArgument("BLEU smoothing_epsilon must be finite and > 0");
  }
};

enum class RougeVariant { kN, kL };

struct RougeConfig {
  RougeVariant variant = RougeVariant::kN;
  std::size_t order = 1;
  double beta = 1.0;

  void validate() const {
    if (variant == RougeVariant::kN && order < 1)
      throw InvalidArgument("ROUGE-N order must be >= 1");
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw InvalidArgument("ROUGE beta must be finite and > 0");
  }
};

struct PrecisionCounts {
  std::size_t clipped_matches = 0;
  std::size_t total = 0;

  friend bool operator==(const PrecisionCounts&,
                         const PrecisionCounts&) = default;
};

struct RougeResult {
  double recall = 0.0;
  double precision = 0.0;
  double f_score = 0.0;
  bool degenerate = false;
};

/// F-measure weighting recall beta^2 times as much as precision.
inline double f_measure(double precision, double recall, double beta) {
  if (precision <= 0.0 && recall <= 0.0) return 0.0;
  const double b2 = beta * beta;
  const double denom = recall + b2 * precision;
  return denom > 0.0 ? (1.0 + b2) * precision * recall / denom : 0.0;
}

namespace detail {

template <class Token>
std::size_t clipped_overlap(const BasicNGramCounts<Token>& ref,
                            const BasicNGramCounts<Token>& hyp) {
  std::size_t matches = 0;
  for (const auto& [gram, count] : hyp.counts)
    matches += std::min(count, ref.count(gram));
  return matches;
}

}  // namespace detail

/// Clipped n-gram matches of the hypothesis against the reference, and the
/// hypothesis n-gram count.
template <class Token>
PrecisionCounts modified_precision(std::span<const Token> reference,
                                   std::span<const Token> hypothesis,
                                   std::size_t n) {
  const auto ref = ngrams(reference, n);
  const auto hyp = ngrams(hypothesis, n);
  return {detail::clipped_overlap(ref, hyp), hyp.total()};
}

inline PrecisionCounts modified_precision(const TokenSequence& reference,
                                          const TokenSequence& hypothesis,
                                          std::size_t n) {
  return modified_precision<std::string>(reference.view(), hypothesis.view(),
                                         n);
}

/// Sufficient statistics for BLEU; sentence and corpus BLEU both reduce to
/// combining one of these.
struct BleuStats {
  std::vector<PrecisionCounts> orders;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;

  BleuStats& operator+=(const BleuStats& other) {
    if (orders.size() < other.orders.size()) orders.resize(other.orders.size());
    for (std::size_t i = 0; i < other.orders.size(); ++i) {
      orders[i].clipped_matches += other.orders[i].clipped_matches;
      orders[i].total += other.orders[i].total;
    }
    hypothesis_length += other.hypothesis_length;
    reference_length += other.reference_length;
    return *this;
  }
};

template <class Token>
BleuStats bleu_stats(std::span<const Token> reference,
                     std::span<const Token> hypothesis, std::size_t max_order) {
  BleuStats stats;
  stats.orders.reserve(max_order);
  for (std::size_t n = 1; n <= max_order; ++n)
    stats.orders.push_back(modified_precision(reference, hypothesis, n));
  stats.hypothesis_length = hypothesis.size();
  stats.reference_length = reference.size();
  return stats;
}

/// Brevity penalty: 1 when the hypothesis is at least as long as the
/// reference, exp(1 - r/h) otherwise.
inline double brevity_penalty(std::size_t reference_length,
                              std::size_t hypothesis_length) {
  if (hypothesis_length >= reference_length) return 1.0;
  if (hypothesis_length == 0) return 0.0;
  return std::exp(1.0 - static_cast<double>(reference_length) /
                            static_cast<double>(hypothesis_length));
}

/// Combines BLEU statistics. A zero clipped count for order n contributes
/// epsilon/total_n, or epsilon alone when the hypothesis has no n-grams of
/// that order.
inline double combine_bleu(const BleuStats& stats, const BleuConfig& config) {
  config.validate();
  if (stats.hypothesis_length == 0)
    return stats.reference_length == 0 ? 1.0 : 0.0;
  if (stats.reference_length == 0) return 0.0;

  const auto weights = config.effective_weights();
  double log_sum = 0.0;
  for (std::size_t i = 0; i < config.max_order; ++i) {
    const PrecisionCounts pc =
        i < stats.orders.size() ? stats.orders[i] : PrecisionCounts{};
    double p;
    if (pc.total == 0) {
      p = config.smoothing_epsilon;
    } else if (pc.clipped_matches == 0) {
      p = config.smoothing_epsilon / static_cast<double>(pc.total);
    } else {
      p = static_cast<double>(pc.clipped_matches) /
          static_cast<double>(pc.total);
    }
    log_sum += weights[i] * std::log(p);
  }
  const double value =
      brevity_penalty(stats.reference_length, stats.hypothesis_length) *
      std::exp(log_sum);
  return std::clamp(value, 0.0, 1.0);
}

template <class Token>
double bleu_value(std::span<const Token> reference,
                  std::span<const Token> hypothesis,
                  const BleuConfig& config = {}) {
  config.validate();
  return combine_bleu(bleu_stats(reference, hypothesis, config.max_order),
                      config);
}

inline MetricScore bleu(const TokenSequence& reference,
                        const TokenSequence& hypothesis,
                        const BleuConfig& config = {}) {
  MetricScore score{"bleu",
                    bleu_value<std::string>(reference.view(),
                                            hypothesis.view(), config),
                    {0.0, 1.0}, reference.empty() || hypothesis.empty()};
  return score;
}

/// Corpus BLEU: match counts, totals and lengths are summed over all pairs
/// before combining. This is not the mean of sentence BLEU.
inline MetricScore corpus_bleu(
    std::span<const std::pair<TokenSequence, TokenSequence>> pairs,
    const BleuConfig& config = {}) {
  if (pairs.empty()) throw InvalidArgument("corpus_bleu needs at least 1 pair");
  config.validate();
  BleuStats total;
  for (const auto& [ref, hyp] : pairs)
    total += bleu_stats<std::string>(ref.view(), hyp.view(), config.max_order);
  return {"bleu", combine_bleu(total, config), {0.0, 1.0},
          total.hypothesis_length == 0 || total.reference_length == 0};
}

template <class Token>
RougeResult rouge_n(std::span<const Token> reference,
                    std::span<const Token> hypothesis, std::size_t order,
                    double beta = 1.0) {
  RougeConfig{RougeVariant::kN, order, beta}.validate();
  const auto ref = ngrams(reference, order);
  const auto hyp = ngrams(hypothesis, order);
  const std::size_t ref_total = ref.total();
  const std::size_t hyp_total = hyp.total();
  const std::size_t matches = detail::clipped_overlap(ref, hyp);

  RougeResult out;
  out.degenerate = ref_total == 0;
  if (ref_total > 0)
    out.recall = static_cast<double>(matches) / static_cast<double>(ref_total);
  if (hyp_total > 0)
    out.precision =
        static_cast<double>(matches) / static_cast<double>(hyp_total);
  out.f_score = f_measure(out.precision, out.recall, beta);
  return out;
}

inline RougeResult rouge_n(const TokenSequence& reference,
                           const TokenSequence& hypothesis, std::size_t order,
                           double beta = 1.0) {
  return rouge_n<std::string>(reference.view(), hypothesis.view(), order, beta);
}

/// Length of the longest common subsequence, O(|a|·|b|) time and O(|b|)
/// memory.
template <class Token>
std::size_t lcs_length(std::span<const Token> a, std::span<const Token> b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

template <class Token>
RougeResult rouge_l(std::span<const Token> reference,
                    std::span<const Token> hypothesis, double beta = 1.0) {
  RougeConfig{RougeVariant::kL, 1, beta}.validate();
  RougeResult out;
  if (reference.empty() || hypothesis.empty()) {
    out.degenerate = true;
    return out;
  }
  const double lcs = static_cast<double>(lcs_length(reference, hypothesis));
  out.recall = lcs / static_cast<double>(reference.size());
  out.precision = lcs / static_cast<double>(hypothesis.size());
  out.f_score = f_measure(out.precision, out.recall, beta);
  return out;
}

inline RougeResult rouge_l(const TokenSequence& reference,
                           const TokenSequence& hypothesis, double beta = 1.0) {
  return rouge_l<std::string>(reference.view(), hypothesis.view(), beta);
}

}  // namespace evalcard
