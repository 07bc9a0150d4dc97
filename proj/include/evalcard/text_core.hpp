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

// Tokenization and n-gram extraction shared by every metric.
//
// The tokenizer NFC-normalizes its input, optionally lowercases it, isolates
// every Unicode punctuation code point (general category P*) as a token of
// its own and splits the remainder on Unicode whitespace. Stopword removal
// and Porter stemming are available but off by default.

#pragma once

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evalcard/error.hpp"
#include "evalcard/porter_stemmer.hpp"

namespace evalcard {

struct TokenizerConfig {
  bool lowercase = true;
  bool stem = false;
  bool remove_stopwords = false;

  friend bool operator==(const TokenizerConfig&,
                         const TokenizerConfig&) = default;
};

/// Normalized tokens of one sentence together with the raw text they came
/// from. Tokens are never empty.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::string source;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  auto begin() const noexcept { return tokens.begin(); }
  auto end() const noexcept { return tokens.end(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }
  std::span<const std::string> view() const noexcept { return tokens; }
};

namespace detail {

inline icu::UnicodeString to_unicode(std::string_view utf8) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
}

inline std::string to_utf8(const icu::UnicodeString& text) {
  std::string out;
  text.toUTF8String(out);
  return out;
}

// Short English list in the spirit of the ROUGE toolkit's smart_common_words.
inline bool is_stopword(std::string_view token) {
  static constexpr std::string_view kStopwords[] = {
      "a",     "about",  "above", "after", "again", "all",   "am",
      "an",    "and",    "any",   "are",   "as",    "at",    "be",
      "been",  "before", "being", "below", "both",  "but",   "by",
      "can",   "could",  "did",   "do",    "does",  "doing", "down",
      "during", "each",  "few",   "for",   "from",  "had",   "has",
      "have",  "having", "he",    "her",   "here",  "hers",  "him",
      "his",   "how",    "i",     "if",    "in",    "into",  "is",
      "it",    "its",    "me",    "more",  "most",  "my",    "of",
      "off",   "on",     "once",  "only",  "or",    "other", "our",
      "out",   "over",   "own",   "same",  "she",   "should", "so",
      "some",  "such",   "than",  "that",  "the",   "their", "them",
      "then",  "there",  "these", "they",  "this",  "those", "through",
      "to",    "too",    "under", "until", "up",    "very",  "was",
      "we",    "were",   "what",  "when",  "where", "which", "while",
      "who",   "whom",   "why",   "will",  "with",  "would", "you",
      "your"};
  return std::find(std::begin(kStopwords), std::end(kStopwords), token) !=
         std::end(kStopwords);
}

}  // namespace detail

/// Returns the NFC form of a UTF-8 string. Invalid byte sequences are
/// replaced by U+FFFD.
inline std::string nfc_normalize(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString normalized =
      nfc->normalize(detail::to_unicode(utf8), status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  return detail::to_utf8(normalized);
}

inline TokenSequence tokenize(std::string_view raw,
                              const TokenizerConfig& config = {}) {
  icu::UnicodeString text = detail::to_unicode(nfc_normalize(raw));
  if (config.lowercase) text.toLower(icu::Locale::getRoot());

  TokenSequence out;
  out.source = std::string(raw);
  icu::UnicodeString current;
  auto flush = [&] {
    if (current.isEmpty()) return;
    out.tokens.push_back(detail::to_utf8(current));
    current.remove();
  };

  for (int32_t i = 0; i < text.length();) {
    const UChar32 c = text.char32At(i);
    i = text.moveIndex32(i, 1);
    if (u_isUWhiteSpace(c)) {
      flush();
    } else if (u_ispunct(c)) {
      flush();
      current.append(c);
      flush();
    } else {
      current.append(c);
    }
  }
  flush();

  if (config.remove_stopwords) {
    std::erase_if(out.tokens,
                  [](const std::string& t) { return detail::is_stopword(t); });
  }
  if (config.stem) {
    for (auto& token : out.tokens) token = porter_stem(token);
    std::erase_if(out.tokens, [](const std::string& t) { return t.empty(); });
  }
  return out;
}

/// Joins tokens with single spaces.
inline std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

/// Multiset of contiguous n-grams of one fixed order.
template <class Token>
struct BasicNGramCounts {
  using NGram = std::vector<Token>;

  std::size_t n = 1;
  std::map<NGram, std::size_t> counts;

  std::size_t total() const {
    std::size_t sum = 0;
    for (const auto& [gram, count] : counts) sum += count;
    return sum;
  }

  std::size_t count(const NGram& gram) const {
    auto it = counts.find(gram);
    return it == counts.end() ? 0 : it->second;
  }

  bool empty() const noexcept { return counts.empty(); }
};

using NGramCounts = BasicNGramCounts<std::string>;

template <class Token>
BasicNGramCounts<Token> ngrams(std::span<const Token> tokens, std::size_t n) {
  if (n == 0) throw InvalidArgument("n-gram order must be >= 1");
  BasicNGramCounts<Token> out;
  out.n = n;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out.counts[typename BasicNGramCounts<Token>::NGram(
        tokens.begin() + i, tokens.begin() + i + n)];
  }
  return out;
}

inline NGramCounts ngrams(const TokenSequence& seq, std::size_t n) {
  return ngrams<std::string>(seq.view(), n);
}

}  // namespace evalcard
