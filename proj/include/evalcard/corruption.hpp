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

// Seeded, graded text corruption.
//
// corrupt() plans ceil(level * rate * len) edits for a sequence of len
// tokens. Each edit draws an operation uniformly from the enabled set, then
// draws its positions. An edit that cannot apply (deleting from an empty
// sequence, swapping fewer than two tokens) is a no-op and is not counted as
// applied. Because the plan for level k is a prefix of the plan for any
// level k' > k under the same seed, higher levels always apply at least as
// many edits as lower ones.

#pragma once

#include <unicode/unistr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "evalcard/datasets.hpp"
#include "evalcard/error.hpp"
#include "evalcard/rng.hpp"
#include "evalcard/text_core.hpp"

namespace evalcard {

enum class CorruptionOp { kWordDelete, kWordInsert, kWordSwap, kCharTypo };

inline constexpr CorruptionOp kAllCorruptionOps[] = {
    CorruptionOp::kWordDelete, CorruptionOp::kWordInsert,
    CorruptionOp::kWordSwap, CorruptionOp::kCharTypo};

inline const char* to_string(CorruptionOp op) {
  switch (op) {
    case CorruptionOp::kWordDelete: return "word_delete";
    case CorruptionOp::kWordInsert: return "word_insert";
    case CorruptionOp::kWordSwap: return "word_swap";
    case CorruptionOp::kCharTypo: return "char_typo";
  }
  return "?";
}

inline CorruptionOp parse_corruption_op(std::string_view name) {
  for (auto op : kAllCorruptionOps)
    if (name == to_string(op)) return op;
  throw InvalidArgument("unknown corruption op '" + std::string(name) +
                        "' (expected word_delete, word_insert, word_swap or "
                        "char_typo)");
}

struct CorruptionSpec {
  unsigned level = 0;
  /// Kept sorted and de-duplicated by normalized().
  std::vector<CorruptionOp> ops_enabled{std::begin(kAllCorruptionOps),
                                        std::end(kAllCorruptionOps)};
  /// Fraction of tokens touched per level.
  double rate = 0.10;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(rate >= 0.0 && rate <= 1.0))
      throw InvalidArgument("corruption rate must be in [0, 1]");
    if (level > 0 && ops_enabled.empty())
      throw InvalidArgument("corruption with level > 0 needs at least one op");
  }

  CorruptionSpec normalized() const {
    CorruptionSpec out = *this;
    std::sort(out.ops_enabled.begin(), out.ops_enabled.end());
    out.ops_enabled.erase(
        std::unique(out.ops_enabled.begin(), out.ops_enabled.end()),
        out.ops_enabled.end());
    return out;
  }

  /// Number of edits planned for a sequence of `length` tokens. A 1e-9 slack
  /// absorbs floating-point noise such as 3 * 0.1 * 10 = 3.0000000000000004.
  std::size_t planned_edits(std::size_t length) const {
    const double x =
        static_cast<double>(level) * rate * static_cast<double>(length);
    return static_cast<std::size_t>(std::max(0.0, std::ceil(x - 1e-9)));
  }
};

struct CorruptionOutcome {
  TokenSequence tokens;
  std::size_t planned = 0;
  std::size_t applied = 0;
};

namespace detail {

inline std::u32string to_u32(const std::string& utf8) {
  const auto u = icu::UnicodeString::fromUTF8(utf8);
  std::u32string out(static_cast<std::size_t>(u.countChar32()), U'\0');
  UErrorCode status = U_ZERO_ERROR;
  u.toUTF32(reinterpret_cast<UChar32*>(out.data()),
            static_cast<int32_t>(out.size()), status);
  return out;
}

inline std::string from_u32(const std::u32string& text) {
  const auto u = icu::UnicodeString::fromUTF32(
      reinterpret_cast<const UChar32*>(text.data()),
      static_cast<int32_t>(text.size()));
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Adjacent transposition, single deletion or single substitution, chosen
// uniformly. Transposition and deletion need two code points; shorter words
// fall back to substitution so the token never becomes empty.
inline std::string typo(const std::string& word, Xoshiro256& rng) {
  std::u32string cps = to_u32(word);
  const auto kind = rng.below(3);
  if (kind == 0 && cps.size() >= 2) {
    const auto i = rng.below(cps.size() - 1);
    std::swap(cps[i], cps[i + 1]);
  } else if (kind == 1 && cps.size() >= 2) {
    cps.erase(cps.begin() + static_cast<std::ptrdiff_t>(rng.below(cps.size())));
  } else {
    const auto i = rng.below(cps.size());
    const bool letter = cps[i] >= U'a' && cps[i] <= U'z';
    // A letter is always replaced by a different letter.
    char32_t replacement = U'a' + static_cast<char32_t>(rng.below(letter ? 25 : 26));
    if (letter && replacement >= cps[i]) ++replacement;
    cps[i] = replacement;
  }
  return from_u32(cps);
}

inline bool apply_edit(std::vector<std::string>& tokens, CorruptionOp op,
                       Xoshiro256& rng) {
  switch (op) {
    case CorruptionOp::kWordDelete: {
      if (tokens.empty()) return false;
      tokens.erase(tokens.begin() +
                   static_cast<std::ptrdiff_t>(rng.below(tokens.size())));
      return true;
    }
    case CorruptionOp::kWordInsert: {
      if (tokens.empty()) return false;
      std::string copy = tokens[rng.below(tokens.size())];
      const auto at = rng.below(tokens.size() + 1);
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at),
                    std::move(copy));
      return true;
    }
    case CorruptionOp::kWordSwap: {
      if (tokens.size() < 2) return false;
      const auto i = rng.below(tokens.size() - 1);
      std::swap(tokens[i], tokens[i + 1]);
      return true;
    }
    case CorruptionOp::kCharTypo: {
      if (tokens.empty()) return false;
      auto& word = tokens[rng.below(tokens.size())];
      word = typo(word, rng);
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Corrupts `seq` and reports how many edits were planned and applied.
/// Deterministic in (seq, spec).
inline CorruptionOutcome corrupt_with_log(const TokenSequence& seq,
                                          const CorruptionSpec& raw_spec) {
  raw_spec.validate();
  const CorruptionSpec spec = raw_spec.normalized();
  CorruptionOutcome out;
  out.planned = spec.planned_edits(seq.size());
  std::vector<std::string> tokens = seq.tokens;
  Xoshiro256 rng(spec.seed);
  for (std::size_t i = 0; i < out.planned; ++i) {
    const CorruptionOp op = spec.ops_enabled[rng.below(spec.ops_enabled.size())];
    if (detail::apply_edit(tokens, op, rng)) ++out.applied;
  }
  if (out.planned == 0) {
    out.tokens = seq;
  } else {
    out.tokens.source = detokenize(tokens);
    out.tokens.tokens = std::move(tokens);
  }
  return out;
}

inline TokenSequence corrupt(const TokenSequence& seq,
                             const CorruptionSpec& spec) {
  return corrupt_with_log(seq, spec).tokens;
}

/// A pair, its hypothesis corrupted at a low level, and at a higher one.
/// The reference is never touched.
struct CorruptionTriple {
  SentencePair original;
  SentencePair corrupted;
  SentencePair more_corrupted;
  std::size_t corrupted_edits = 0;
  std::size_t more_corrupted_edits = 0;
};

/// Corrupts the hypothesis side of one pair. The per-pair seed is
/// derive_seed(spec.seed, pair.id).
inline CorruptionOutcome corrupt_pair(const SentencePair& pair,
                                      const CorruptionSpec& spec,
                                      const TokenizerConfig& tokenizer = {}) {
  CorruptionSpec local = spec;
  local.seed = derive_seed(spec.seed, pair.id);
  return corrupt_with_log(tokenize(pair.hypothesis, tokenizer), local);
}

inline std::vector<CorruptionTriple> make_triples(
    const std::vector<SentencePair>& pairs, const CorruptionSpec& low,
    const CorruptionSpec& high, const TokenizerConfig& tokenizer = {}) {
  low.validate();
  high.validate();
  if (high.level <= low.level)
    throw InvalidArgument("the high corruption level must exceed the low one");

  std::vector<CorruptionTriple> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const auto a = corrupt_pair(pair, low, tokenizer);
    const auto b = corrupt_pair(pair, high, tokenizer);
    CorruptionTriple t;
    t.original = pair;
    t.corrupted = {pair.id, pair.reference, a.tokens.source};
    t.more_corrupted = {pair.id, pair.reference, b.tokens.source};
    t.corrupted_edits = a.applied;
    t.more_corrupted_edits = b.applied;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace evalcard
