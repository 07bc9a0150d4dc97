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

// End-to-end acceptance checks. Prints one PASS/FAIL line per check and
// exits non-zero if any check fails. The stsb group exits 77 (skip) when
// the STS-B dev file is not available.

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evalcard/evalcard.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace evalcard::acceptance {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Tolerances and pinned values.
constexpr double kExampleTolerance = 1e-12;
constexpr double kKendallTolerance = 1e-12;
constexpr double kFuzzSeconds = 5.0;
constexpr std::size_t kFuzzPairs = 1000;
constexpr std::size_t kRandomTriples = 3000;
constexpr double kRandomMonotonicity = 1.0 / 6.0;
constexpr double kRandomMonotonicityTolerance = 0.05;
constexpr double kNegationFloor = 0.85;
constexpr std::uint64_t kCorruptionSeed = 20261015;
constexpr double kRouge1MonotonicityFloor = 0.886;
constexpr double kStsbMargin = 0.05;
constexpr double kStsbSeconds = 60.0;
constexpr int kSkip = 77;

struct Tally {
  int passed = 0;
  int failed = 0;

  void check(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    ++(ok ? passed : failed);
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

// Run a check body, turning an escaped exception into a failure line.
void guarded(Tally& t, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    t.check(name, false, std::string("exception: ") + e.what());
  }
}

std::string random_sentence(Xoshiro256& rng, char prefix, std::size_t len) {
  std::string s;
  for (std::size_t i = 0; i < len; ++i) {
    if (i) s += ' ';
    s += prefix + std::to_string(rng.below(40));
  }
  return s;
}

// Smoothed BLEU when no hypothesis n-gram matches, computed from lengths only.
double disjoint_bleu(std::size_t ref_len, std::size_t hyp_len, const BleuConfig& cfg) {
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= cfg.max_order; ++n) {
    const double total = hyp_len >= n ? static_cast<double>(hyp_len - n + 1) : 0.0;
    const double p = total > 0 ? cfg.smoothing_epsilon / total : cfg.smoothing_epsilon;
    log_sum += std::log(p) / static_cast<double>(cfg.max_order);
  }
  const double bp = hyp_len >= ref_len ? 1.0
                                       : std::exp(1.0 - static_cast<double>(ref_len) / hyp_len);
  return bp * std::exp(log_sum);
}

void metric_fuzz(Tally& t) {
  const auto t0 = Clock::now();
  Xoshiro256 rng(99);
  std::vector<std::unique_ptr<BuiltinMetric>> metrics;
  for (const auto& name : BuiltinMetric::names()) metrics.push_back(std::make_unique<BuiltinMetric>(name));
  const BleuConfig cfg;
  std::size_t violations = 0;
  std::string first;
  auto violation = [&](const std::string& what) {
    if (violations++ == 0) first = what;
  };
  for (std::size_t i = 0; i < kFuzzPairs; ++i) {
    const std::string id = "f" + std::to_string(i);
    const std::size_t rlen = 4 + rng.below(27), hlen = 1 + rng.below(30);
    const std::string ref = random_sentence(rng, 'w', rlen);
    const std::string hyp = random_sentence(rng, 'w', hlen);
    const std::string disjoint = random_sentence(rng, 'z', hlen);
    for (auto& m : metrics) {
      const auto& d = m->descriptor();
      const double self = score_pair(*m, {id, ref, ref}).value;
      if (self != d.range.hi) violation(d.name + " identity " + id);
      const double some = score_pair(*m, {id, ref, hyp}).value;
      const double none = score_pair(*m, {id, ref, disjoint}).value;
      if (some < d.range.lo || some > d.range.hi) violation(d.name + " range " + id);
      if (none > some) violation(d.name + " disjoint above overlap " + id);
      if (d.name == "bleu") {
        if (std::abs(none - disjoint_bleu(rlen, hlen, cfg)) > 1e-12) violation("bleu disjoint value " + id);
      } else if (none != d.range.lo) {
        violation(d.name + " disjoint minimality " + id);
      }
    }
  }
  const double secs = seconds_since(t0);
  t.check("metric_fuzz_identity_disjoint", violations == 0 && secs < kFuzzSeconds,
          std::to_string(kFuzzPairs) + " pairs x " + std::to_string(metrics.size()) +
              " metrics, violations=" + std::to_string(violations) +
              (first.empty() ? "" : " (first: " + first + ")") + ", " + fmt(secs, 3) +
              " s (limit " + fmt(kFuzzSeconds) + " s)");
}

void clipping(Tally& t) {
  const auto ref = tokenize("the cat is on the mat");
  const auto hyp = tokenize("the the the the the the the");
  const auto got = modified_precision(ref, hyp, 1);
  const auto want = oracle::brute_force_clipped(ref.tokens, hyp.tokens, 1);
  t.check("modified_precision_clipping",
          got.clipped_matches == 2 && got.total == 7 && want == 2,
          "got (" + std::to_string(got.clipped_matches) + ", " + std::to_string(got.total) +
              "), oracle clipped " + std::to_string(want) + ", expected (2, 7)");
}

// Every sequence of length <= 8 over {0,1,2}, indexed by length then value.
// Each sequence carries the set of its subsequences as a bitset over that
// index, so a common subsequence of maximal length is the highest set bit of
// the intersection.
void exhaustive_lcs(Tally& t) {
  constexpr std::size_t kMaxLen = 8, kAlphabet = 3;
  std::array<std::size_t, kMaxLen + 2> offset{};
  std::array<std::size_t, kMaxLen + 1> pow3{};
  pow3[0] = 1;
  for (std::size_t l = 1; l <= kMaxLen; ++l) pow3[l] = pow3[l - 1] * kAlphabet;
  for (std::size_t l = 0; l <= kMaxLen; ++l) offset[l + 1] = offset[l] + pow3[l];
  const std::size_t count = offset[kMaxLen + 1];
  const std::size_t words = (count + 63) / 64;

  std::vector<std::vector<int>> seqs(count);
  std::vector<std::size_t> length_of(count);
  for (std::size_t l = 0; l <= kMaxLen; ++l)
    for (std::size_t v = 0; v < pow3[l]; ++v) {
      std::vector<int> s(l);
      std::size_t x = v;
      for (std::size_t k = l; k-- > 0;) {
        s[k] = static_cast<int>(x % kAlphabet);
        x /= kAlphabet;
      }
      seqs[offset[l] + v] = std::move(s);
      length_of[offset[l] + v] = l;
    }

  auto index_of = [&](const std::vector<int>& s) {
    std::size_t v = 0;
    for (int c : s) v = v * kAlphabet + static_cast<std::size_t>(c);
    return offset[s.size()] + v;
  };
  std::vector<std::uint64_t> subs(count * words, 0);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& s = seqs[i];
    for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
      std::vector<int> sub;
      for (std::size_t k = 0; k < s.size(); ++k)
        if (mask & (1u << k)) sub.push_back(s[k]);
      const std::size_t j = index_of(sub);
      subs[i * words + j / 64] |= std::uint64_t{1} << (j % 64);
    }
  }

  const auto t0 = Clock::now();
  std::size_t mismatches = 0, checked = 0;
  std::string first;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t* a = &subs[i * words];
    for (std::size_t j = i; j < count; ++j) {
      const std::uint64_t* b = &subs[j * words];
      std::size_t expected = 0;
      for (std::size_t w = words; w-- > 0;) {
        const std::uint64_t both = a[w] & b[w];
        if (both) {
          expected = length_of[w * 64 + 63 - static_cast<std::size_t>(std::countl_zero(both))];
          break;
        }
      }
      const std::size_t got = lcs_length<int>(seqs[i], seqs[j]);
      const std::size_t swapped = lcs_length<int>(seqs[j], seqs[i]);
      ++checked;
      if (got != expected || swapped != expected) {
        if (mismatches++ == 0) first = "pair (" + std::to_string(i) + ", " + std::to_string(j) + ")";
      }
    }
  }
  t.check("rouge_l_lcs_exhaustive", mismatches == 0,
          std::to_string(count) + " sequences, " + std::to_string(checked) +
              " unordered pairs (both argument orders), mismatches=" + std::to_string(mismatches) +
              (first.empty() ? "" : " first " + first) + ", " + fmt(seconds_since(t0), 3) + " s");
}

void exhaustive_kendall(Tally& t) {
  std::size_t mismatches = 0, checked = 0, undefined = 0;
  std::string first;
  for (std::size_t n = 2; n <= 7; ++n) {
    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) total *= 3;
    std::vector<std::vector<double>> all(total, std::vector<double>(n));
    for (std::size_t v = 0; v < total; ++v) {
      std::size_t x = v;
      for (std::size_t k = 0; k < n; ++k, x /= 3) all[v][k] = static_cast<double>(x % 3);
    }
    for (const auto& xs : all)
      for (const auto& ys : all) {
        ++checked;
        const auto expected = oracle::brute_force_tau_b(xs, ys);
        std::optional<double> got;
        try {
          got = kendall_tau_b(PairedSamples(xs, ys));
        } catch (const UndefinedCorrelation&) {
        }
        if (!expected) ++undefined;
        const bool same = expected.has_value() == got.has_value() &&
                          (!expected || std::abs(*expected - *got) <= kKendallTolerance);
        if (!same && mismatches++ == 0) first = "n=" + std::to_string(n);
      }
  }
  t.check("kendall_tau_b_exhaustive", mismatches == 0,
          std::to_string(checked) + " sample pairs (n=2..7, values {0,1,2}; " +
              std::to_string(undefined) + " undefined on both sides), mismatches=" +
              std::to_string(mismatches) + (first.empty() ? "" : " first at " + first) +
              ", tolerance " + fmt(kKendallTolerance));
}

void correlation_examples(Tally& t) {
  const double rho = spearman(PairedSamples({1, 2, 3, 4}, {2, 1, 4, 3}));
  t.check("spearman_example", std::abs(rho - 0.6) <= kExampleTolerance,
          "spearman([1,2,3,4],[2,1,4,3]) = " + fmt(rho, 17) + ", expected 0.6 within " +
              fmt(kExampleTolerance));
  const double tau = kendall_tau_b(PairedSamples({1, 2, 3}, {2, 1, 3}));
  t.check("kendall_example", std::abs(tau - 1.0 / 3.0) <= kExampleTolerance,
          "kendall([1,2,3],[2,1,3]) = " + fmt(tau, 17) + ", expected 1/3 within " +
              fmt(kExampleTolerance));
}

void oracle_metrics(Tally& t) {
  const auto records = load_similarity(testing::data_path("similarity_small.tsv"), Format::kTsv).records;
  std::map<std::string, double> gold;
  for (const auto& r : records) gold[r.pair.id] = r.human_score;
  FunctionMetric oracle("oracle", {0, 1}, [&](const SentencePair& p) { return gold.at(p.id) / 5.0; });
  FunctionMetric anti("anti_oracle", {0, 1}, [&](const SentencePair& p) { return 1.0 - gold.at(p.id) / 5.0; });
  FunctionMetric constant("constant", {0, 1}, [](const SentencePair&) { return 0.5; });
  const auto result = run_similarity_criterion({&oracle, &anti, &constant}, records);

  const double up = result.for_metric("oracle").value("spearman");
  const double down = result.for_metric("anti_oracle").value("spearman");
  t.check("oracle_spearman_exact", up == 1.0, "spearman = " + fmt(up, 17) + ", expected exactly 1");
  t.check("anti_oracle_spearman_exact", down == -1.0,
          "spearman = " + fmt(down, 17) + ", expected exactly -1");

  const auto& c = result.for_metric("constant");
  const auto* stat = c.find("spearman");
  const bool numeric = stat != nullptr && stat->defined();
  t.check("constant_metric_degenerate", c.has_flag("constant_metric") && !numeric,
          std::string("constant_metric flag ") + (c.has_flag("constant_metric") ? "set" : "missing") +
              ", spearman " + (numeric ? "reported as a number" : "absent"));
}

void random_monotonicity(Tally& t) {
  std::vector<CorruptionTriple> triples;
  for (std::size_t i = 0; i < kRandomTriples; ++i) {
    const std::string id = "t" + std::to_string(i);
    triples.push_back({{id, "ref", "h0"}, {id, "ref", "h1"}, {id, "ref", "h2"}, 1, 2});
  }
  Xoshiro256 rng(kCorruptionSeed);
  FunctionMetric random("seeded_random", {0, 1}, [&](const SentencePair&) { return rng.uniform(); });
  const auto r = run_corruption_criterion({&random}, triples).metrics.at(0);
  const double rate = r.monotonicity_rate.value_or(-1.0);
  t.check("random_metric_monotonicity",
          std::abs(rate - kRandomMonotonicity) <= kRandomMonotonicityTolerance,
          std::to_string(r.sample_count) + " triples, rate = " + fmt(rate) + ", expected 1/6 +- " +
              fmt(kRandomMonotonicityTolerance));
}

void failure_mode_fixtures(Tally& t) {
  const std::string sentence = "The movie was good and the actors were very convincing";
  const std::string negated = "The movie was not good and the actors were very convincing";
  const auto ref = tokenize(sentence);
  const double f = rouge_n(ref, tokenize(negated), 1).f_score;
  const double l = static_cast<double>(ref.size());
  t.check("negation_rouge1", f >= kNegationFloor && f >= l / (l + 1) - 1e-12,
          "ROUGE-1 F = " + fmt(f) + " on a " + std::to_string(ref.size()) + "-token sentence, floor " +
              fmt(kNegationFloor) + " and L/(L+1) = " + fmt(l / (l + 1)));

  const BleuConfig unigram{1, {1.0}, 0.01};
  Xoshiro256 rng(7);
  std::size_t violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = tokenize(random_sentence(rng, 'w', 3 + rng.below(15)));
    auto h = tokenize(random_sentence(rng, 'w', 3 + rng.below(15)));
    const double before = bleu(r, h, unigram).value;
    for (std::size_t i = h.tokens.size(); i > 1; --i) std::swap(h.tokens[i - 1], h.tokens[rng.below(i)]);
    if (bleu(r, h, unigram).value != before) ++violations;
  }
  t.check("unigram_bleu_shuffle_invariance", violations == 0,
          "200 shuffled hypotheses, violations=" + std::to_string(violations));
}

std::string golden_body(unsigned jobs) {
  RunConfig config = load_run_config(testing::data_path("golden_config.json"));
  config.jobs = jobs;
  MetricRegistry registry = build_registry(config);
  return report_body(run_scorecard(config, registry)).dump(2) + "\n";
}

void golden_report(Tally& t, const std::string& write_to) {
  const std::string first = golden_body(1);
  if (!write_to.empty()) testing::write_file(write_to, first);
  const std::string again = golden_body(1);
  const std::string parallel = golden_body(4);
  const fs::path pinned_path = testing::data_path("golden_report_body.json");
  const std::string pinned = fs::exists(pinned_path) ? testing::read_file(pinned_path) : "";
  t.check("golden_report_byte_identity", first == again && first == parallel && first == pinned,
          std::string("repeat run ") + (first == again ? "identical" : "differs") + ", jobs=4 " +
              (first == parallel ? "identical" : "differs") + ", pinned file " +
              (pinned.empty() ? "missing" : first == pinned ? "identical" : "differs") + " (" +
              std::to_string(first.size()) + " bytes)");
}

void corruption_floor(Tally& t) {
  const auto pairs = load_pairs(testing::data_path("pairs_500.tsv"), Format::kTsv).records;
  CorruptionSpec low{1, {CorruptionOp::kWordDelete}, 0.1, kCorruptionSeed};
  CorruptionSpec high{3, {CorruptionOp::kWordDelete}, 0.1, kCorruptionSeed};
  const auto triples = make_triples(pairs, low, high);
  BuiltinMetric rouge1("rouge1");
  const auto r = run_corruption_criterion({&rouge1}, triples).metrics.at(0);
  const double rate = r.monotonicity_rate.value_or(-1.0);
  t.check("corruption_rouge1_monotonicity_floor", rate >= kRouge1MonotonicityFloor,
          std::to_string(r.sample_count) + " triples (word_delete, rates 0.1/0.3, seed " +
              std::to_string(kCorruptionSeed) + "), rate = " + fmt(rate, 10) + ", floor " +
              fmt(kRouge1MonotonicityFloor, 10));
}

int stsb_direction(Tally& t) {
  fs::path path;
  if (const char* env = std::getenv("STSB_DEV")) path = env;
  if (path.empty()) path = testing::data_path("stsb/sts-dev.csv");
  if (!fs::exists(path)) {
    t.check("stsb_rouge1_over_bleu", false,
            "STS-B dev file not found at " + path.string() +
                " (set STSB_DEV to the sts-dev.csv distribution file)");
    return kSkip;
  }
  const auto t0 = Clock::now();
  const auto loaded = load_similarity(path, Format::kStsb);
  BuiltinMetric rouge1("rouge1"), bleu_metric("bleu");
  const auto result = run_similarity_criterion({&rouge1, &bleu_metric}, loaded.records);
  const double rho_rouge = result.for_metric("rouge1").value("spearman");
  const double rho_bleu = result.for_metric("bleu").value("spearman");
  const double secs = seconds_since(t0);
  t.check("stsb_rouge1_over_bleu", rho_rouge - rho_bleu > kStsbMargin && secs < kStsbSeconds,
          std::to_string(loaded.records.size()) + " pairs, spearman rouge1 = " + fmt(rho_rouge) +
              ", bleu = " + fmt(rho_bleu) + ", margin " + fmt(rho_rouge - rho_bleu) + " (need > " +
              fmt(kStsbMargin) + "), " + fmt(secs, 3) + " s (limit " + fmt(kStsbSeconds) + " s)");
  return 0;
}

}  // namespace
}  // namespace evalcard::acceptance

int main(int argc, char** argv) {
  using namespace evalcard::acceptance;
  CLI::App app{"Acceptance checks"};
  std::string group = "all";
  std::string write_golden;
  app.add_option("--group", group, "core, stsb or all")
      ->check(CLI::IsMember({"core", "stsb", "all"}))
      ->capture_default_str();
  app.add_option("--write-golden", write_golden, "Also write the golden report body to this path");
  CLI11_PARSE(app, argc, argv);

  Tally t;
  int stsb_status = 0;
  if (group != "stsb") {
    guarded(t, "metric_fuzz_identity_disjoint", [&] { metric_fuzz(t); });
    guarded(t, "modified_precision_clipping", [&] { clipping(t); });
    guarded(t, "rouge_l_lcs_exhaustive", [&] { exhaustive_lcs(t); });
    guarded(t, "kendall_tau_b_exhaustive", [&] { exhaustive_kendall(t); });
    guarded(t, "correlation_examples", [&] { correlation_examples(t); });
    guarded(t, "oracle_metrics", [&] { oracle_metrics(t); });
    guarded(t, "random_metric_monotonicity", [&] { random_monotonicity(t); });
    guarded(t, "failure_mode_fixtures", [&] { failure_mode_fixtures(t); });
    guarded(t, "golden_report_byte_identity", [&] { golden_report(t, write_golden); });
    guarded(t, "corruption_rouge1_monotonicity_floor", [&] { corruption_floor(t); });
  }
  if (group != "core") guarded(t, "stsb_rouge1_over_bleu", [&] { stsb_status = stsb_direction(t); });

  std::cout << t.passed << " passed, " << t.failed << " failed" << std::endl;
  if (stsb_status == kSkip && t.failed == 1) return kSkip;
  return t.failed == 0 ? 0 : 1;
}
