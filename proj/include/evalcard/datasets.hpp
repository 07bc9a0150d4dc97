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

// Corpus readers and writers.
//
// Canonical formats (UTF-8, "\n" line endings, no header, no quoting):
//
//   pairs       TSV    id \t reference \t hypothesis
//               JSONL  {"id":..,"reference":..,"hypothesis":..}
//   similarity  TSV    id \t sentence1 \t sentence2 \t score   (score in [0,5])
//   entailment  JSONL  {"id":..,"premise":..,"entailment":..,"neutral":..,
//                       "contradiction":..}                     ("id" optional)
//
// Writing a canonically formatted file back out reproduces it byte for byte.
// The raw STS-B distribution layout (genre, file, year, id, score, s1, s2)
// and MNLI-style labeled pairs are accepted through dedicated entry points.

#pragma once

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_set>
#include <utility>
#include <vector>

#include "evalcard/error.hpp"

namespace evalcard {

struct SentencePair {
  std::string id;
  std::string reference;
  std::string hypothesis;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct SimilarityRecord {
  SentencePair pair;
  /// Human similarity judgement on the 0-5 scale.
  double human_score = 0.0;
};

enum class EntailmentLabel { kContradiction = 0, kNeutral = 1, kEntailment = 2 };

/// Gold ordinal used for ranking: entailment 2, neutral 1, contradiction 0.
inline int gold_ordinal(EntailmentLabel label) { return static_cast<int>(label); }

struct EntailmentTriple {
  std::string id;
  std::string premise;
  std::string entailment;
  std::string neutral;
  std::string contradiction;

  const std::string& hypothesis(EntailmentLabel label) const {
    switch (label) {
      case EntailmentLabel::kEntailment: return entailment;
      case EntailmentLabel::kNeutral: return neutral;
      case EntailmentLabel::kContradiction: return contradiction;
    }
    return neutral;
  }
};

/// A premise/hypothesis pair with an inference label, as distributed by
/// MNLI-style corpora.
struct LabeledPair {
  std::string premise;
  std::string hypothesis;
  EntailmentLabel label = EntailmentLabel::kNeutral;
};

/// A non-fatal observation about an input line (0 = whole file).
struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

template <class T>
struct Loaded {
  std::vector<T> records;
  std::vector<Diagnostic> warnings;
};

enum class Format { kTsv, kJsonl, kStsb };

inline Format parse_format(std::string_view name) {
  if (name == "tsv") return Format::kTsv;
  if (name == "jsonl") return Format::kJsonl;
  if (name == "stsb") return Format::kStsb;
  throw InvalidArgument("unknown format '" + std::string(name) +
                        "' (expected tsv, jsonl or stsb)");
}

inline const char* to_string(Format f) {
  switch (f) {
    case Format::kTsv: return "tsv";
    case Format::kJsonl: return "jsonl";
    case Format::kStsb: return "stsb";
  }
  return "?";
}

/// Guesses a format from a file extension: .jsonl/.json -> jsonl, .csv ->
/// stsb (the STS-B distribution files), anything else -> tsv.
inline Format format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") return Format::kJsonl;
  if (ext == ".csv") return Format::kStsb;
  return Format::kTsv;
}

inline std::string format_score(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

namespace detail {

inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    char32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c >> 5) == 0x6) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c >> 4) == 0xe) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c >> 3) == 0x1e) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && (cp < 0x10000 || cp > 0x10ffff)) ||
        (cp >= 0xd800 && cp <= 0xdfff))
      return false;
    i += len;
  }
  return true;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline double parse_double(std::string_view text, std::size_t line,
                           const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw DataError(std::string("malformed ") + what + " '" +
                        std::string(text) + "'",
                    line);
  return v;
}

/// Calls fn(line_number, line) for every non-blank line. Blank lines become
/// warnings. Lines must be valid UTF-8.
template <class Fn>
void for_each_line(std::istream& in, std::vector<Diagnostic>& warnings,
                   Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!valid_utf8(line)) throw DataError("invalid UTF-8", number);
    if (line.find_first_not_of(" \t") == std::string::npos) {
      warnings.push_back({number, "blank line skipped"});
      continue;
    }
    fn(number, std::string_view(line));
  }
}

inline nlohmann::json parse_json_line(std::string_view line,
                                      std::size_t number) {
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) throw DataError("expected a JSON object", number);
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed JSON: ") + e.what(), number);
  }
}

inline std::string json_string_field(const nlohmann::json& j,
                                     const std::string& field,
                                     std::size_t number) {
  auto it = j.find(field);
  if (it == j.end())
    throw DataError("missing field \"" + field + "\"", number);
  if (!it->is_string())
    throw DataError("field \"" + field + "\" must be a string", number);
  return it->get<std::string>();
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

inline void warn_if_empty(const SentencePair& p, std::size_t number,
                          std::vector<Diagnostic>& warnings) {
  if (p.reference.empty())
    warnings.push_back({number, "empty reference for id " + p.id});
  if (p.hypothesis.empty())
    warnings.push_back({number, "empty hypothesis for id " + p.id});
}

inline void check_unique(std::unordered_set<std::string>& seen,
                         const std::string& id, std::size_t number) {
  if (id.empty()) throw DataError("empty id", number);
  if (!seen.insert(id).second) throw DataError("duplicate id '" + id + "'", number);
}

inline EntailmentLabel parse_label(std::string_view text, std::size_t number) {
  if (text == "entailment") return EntailmentLabel::kEntailment;
  if (text == "neutral") return EntailmentLabel::kNeutral;
  if (text == "contradiction") return EntailmentLabel::kContradiction;
  throw DataError("unknown label '" + std::string(text) + "'", number);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sentence pairs

inline Loaded<SentencePair> read_pairs(std::istream& in, Format format) {
  Loaded<SentencePair> out;
  std::unordered_set<std::string> seen;
  detail::for_each_line(in, out.warnings, [&](std::size_t n, std::string_view line) {
    SentencePair p;
    if (format == Format::kJsonl) {
      const auto j = detail::parse_json_line(line, n);
      p.id = detail::json_string_field(j, "id", n);
      p.reference = detail::json_string_field(j, "reference", n);
      p.hypothesis = detail::json_string_field(j, "hypothesis", n);
    } else if (format == Format::kTsv) {
      const auto fields = detail::split_tabs(line);
      if (fields.size() != 3)
        throw DataError("expected 3 tab-separated fields (id, reference, "
                        "hypothesis), got " + std::to_string(fields.size()),
                        n);
      p = {std::string(fields[0]), std::string(fields[1]),
           std::string(fields[2])};
    } else {
      throw InvalidArgument("pairs must be tsv or jsonl");
    }
    detail::check_unique(seen, p.id, n);
    detail::warn_if_empty(p, n, out.warnings);
    out.records.push_back(std::move(p));
  });
  if (out.records.empty()) out.warnings.push_back({0, "no pairs in input"});
  return out;
}

inline Loaded<SentencePair> load_pairs(const std::filesystem::path& path,
                                       Format format) {
  auto in = detail::open_input(path);
  return read_pairs(in, format);
}

inline void write_pairs(std::ostream& out, const std::vector<SentencePair>& pairs,
                        Format format) {
  for (const auto& p : pairs) {
    if (format == Format::kJsonl) {
      nlohmann::ordered_json j;
      j["id"] = p.id;
      j["reference"] = p.reference;
      j["hypothesis"] = p.hypothesis;
      out << j.dump() << '\n';
    } else if (format == Format::kTsv) {
      for (const auto* field : {&p.id, &p.reference, &p.hypothesis}) {
        if (field->find_first_of("\t\n") != std::string::npos)
          throw DataError("tab or newline inside a TSV field of id " + p.id);
      }
      out << p.id << '\t' << p.reference << '\t' << p.hypothesis << '\n';
    } else {
      throw InvalidArgument("pairs must be tsv or jsonl");
    }
  }
}

// ---------------------------------------------------------------------------
// Similarity records

inline Loaded<SimilarityRecord> read_similarity(std::istream& in,
                                                Format format) {
  Loaded<SimilarityRecord> out;
  std::unordered_set<std::string> seen;
  detail::for_each_line(in, out.warnings, [&](std::size_t n, std::string_view line) {
    const auto fields = detail::split_tabs(line);
    SimilarityRecord r;
    std::string_view score_text;
    if (format == Format::kTsv) {
      if (fields.size() != 4)
        throw DataError("expected 4 tab-separated fields (id, sentence1, "
                        "sentence2, score), got " + std::to_string(fields.size()),
                        n);
      r.pair = {std::string(fields[0]), std::string(fields[1]),
                std::string(fields[2])};
      score_text = fields[3];
    } else if (format == Format::kStsb) {
      // genre, filename, year, id, score, sentence1, sentence2[, sources...]
      if (fields.size() < 7)
        throw DataError("expected at least 7 tab-separated STS-B fields, got " +
                            std::to_string(fields.size()),
                        n);
      if (fields.size() > 7)
        out.warnings.push_back({n, "ignored " + std::to_string(fields.size() - 7) +
                                       " trailing STS-B field(s)"});
      r.pair = {"stsb-" + std::to_string(n), std::string(fields[5]),
                std::string(fields[6])};
      score_text = fields[4];
    } else {
      throw InvalidArgument("similarity records must be tsv or stsb");
    }
    r.human_score = detail::parse_double(score_text, n, "score");
    if (r.human_score < 0.0 || r.human_score > 5.0)
      throw DataError("score " + std::string(score_text) +
                          " outside the [0, 5] similarity scale",
                      n);
    detail::check_unique(seen, r.pair.id, n);
    detail::warn_if_empty(r.pair, n, out.warnings);
    out.records.push_back(std::move(r));
  });
  if (out.records.empty()) out.warnings.push_back({0, "no records in input"});
  return out;
}

inline Loaded<SimilarityRecord> load_similarity(
    const std::filesystem::path& path, Format format) {
  auto in = detail::open_input(path);
  return read_similarity(in, format);
}

inline void write_similarity(std::ostream& out,
                             const std::vector<SimilarityRecord>& records) {
  for (const auto& r : records) {
    out << r.pair.id << '\t' << r.pair.reference << '\t' << r.pair.hypothesis
        << '\t' << format_score(r.human_score) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Entailment triples

inline Loaded<EntailmentTriple> read_entailment_triples(std::istream& in) {
  Loaded<EntailmentTriple> out;
  std::unordered_set<std::string> seen;
  detail::for_each_line(in, out.warnings, [&](std::size_t n, std::string_view line) {
    const auto j = detail::parse_json_line(line, n);
    EntailmentTriple t;
    t.id = j.contains("id") ? detail::json_string_field(j, "id", n)
                            : "triple-" + std::to_string(n);
    t.premise = detail::json_string_field(j, "premise", n);
    t.entailment = detail::json_string_field(j, "entailment", n);
    t.neutral = detail::json_string_field(j, "neutral", n);
    t.contradiction = detail::json_string_field(j, "contradiction", n);
    if (t.entailment == t.neutral || t.entailment == t.contradiction ||
        t.neutral == t.contradiction)
      throw DataError("hypotheses of a triple must be distinct", n);
    detail::check_unique(seen, t.id, n);
    out.records.push_back(std::move(t));
  });
  if (out.records.empty()) out.warnings.push_back({0, "no triples in input"});
  return out;
}

inline Loaded<EntailmentTriple> load_entailment_triples(
    const std::filesystem::path& path, Format format = Format::kJsonl) {
  if (format != Format::kJsonl)
    throw InvalidArgument("entailment triples must be jsonl");
  auto in = detail::open_input(path);
  return read_entailment_triples(in);
}

inline void write_entailment_triples(
    std::ostream& out, const std::vector<EntailmentTriple>& triples) {
  for (const auto& t : triples) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["premise"] = t.premise;
    j["entailment"] = t.entailment;
    j["neutral"] = t.neutral;
    j["contradiction"] = t.contradiction;
    out << j.dump() << '\n';
  }
}

/// Reads MNLI-style labeled pairs. JSONL lines carry premise/hypothesis/label
/// (or the distribution's sentence1/sentence2/gold_label); TSV lines are
/// premise \t hypothesis \t label. Lines without a usable gold label ("-")
/// are skipped with a warning.
inline Loaded<LabeledPair> read_labeled_pairs(std::istream& in, Format format) {
  Loaded<LabeledPair> out;
  detail::for_each_line(in, out.warnings, [&](std::size_t n, std::string_view line) {
    LabeledPair p;
    std::string label;
    if (format == Format::kJsonl) {
      const auto j = detail::parse_json_line(line, n);
      const bool raw = j.contains("sentence1");
      p.premise = detail::json_string_field(j, raw ? "sentence1" : "premise", n);
      p.hypothesis =
          detail::json_string_field(j, raw ? "sentence2" : "hypothesis", n);
      label = detail::json_string_field(j, raw ? "gold_label" : "label", n);
    } else if (format == Format::kTsv) {
      const auto fields = detail::split_tabs(line);
      if (fields.size() != 3)
        throw DataError("expected 3 tab-separated fields (premise, hypothesis, "
                        "label)",
                        n);
      p.premise = std::string(fields[0]);
      p.hypothesis = std::string(fields[1]);
      label = std::string(fields[2]);
    } else {
      throw InvalidArgument("labeled pairs must be tsv or jsonl");
    }
    if (label == "-") {
      out.warnings.push_back({n, "no gold label, line skipped"});
      return;
    }
    p.label = detail::parse_label(label, n);
    out.records.push_back(std::move(p));
  });
  return out;
}

/// Groups labeled pairs by premise (in order of first appearance) and emits
/// one triple per premise that has every label, taking the first hypothesis
/// seen for each label. Triple ids are "mnli-<k>" where k is the premise's
/// first-appearance index.
inline Loaded<EntailmentTriple> group_into_triples(
    const std::vector<LabeledPair>& pairs) {
  struct Group {
    std::size_t index = 0;
    std::map<EntailmentLabel, std::string> first;
  };
  std::vector<std::string> premise_order;
  std::map<std::string, Group> groups;
  for (const auto& p : pairs) {
    auto [it, inserted] = groups.try_emplace(p.premise);
    if (inserted) {
      it->second.index = premise_order.size();
      premise_order.push_back(p.premise);
    }
    it->second.first.try_emplace(p.label, p.hypothesis);
  }

  Loaded<EntailmentTriple> out;
  for (const auto& premise : premise_order) {
    const Group& g = groups.at(premise);
    if (g.first.size() != 3) continue;
    EntailmentTriple t{"mnli-" + std::to_string(g.index), premise,
                       g.first.at(EntailmentLabel::kEntailment),
                       g.first.at(EntailmentLabel::kNeutral),
                       g.first.at(EntailmentLabel::kContradiction)};
    if (t.entailment == t.neutral || t.entailment == t.contradiction ||
        t.neutral == t.contradiction) {
      out.warnings.push_back({0, t.id + ": hypotheses not distinct, dropped"});
      continue;
    }
    out.records.push_back(std::move(t));
  }
  return out;
}

}  // namespace evalcard
