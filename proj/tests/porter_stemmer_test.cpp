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

#include "evalcard/porter_stemmer.hpp"

#include <string>
#include <utility>
#include <vector>

#include "gtest/gtest.h"

namespace evalcard {
namespace {

// Worked examples from Porter's description of the algorithm.
TEST(PorterStemmerTest, ReferenceExamples) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"caresses", "caress"},   {"ponies", "poni"},        {"ties", "ti"},
      {"caress", "caress"},     {"cats", "cat"},           {"feed", "feed"},
      {"agreed", "agre"},       {"plastered", "plaster"},  {"bled", "bled"},
      {"motoring", "motor"},    {"sing", "sing"},          {"conflated", "conflat"},
      {"troubled", "troubl"},   {"sized", "size"},         {"hopping", "hop"},
      {"tanned", "tan"},        {"falling", "fall"},       {"hissing", "hiss"},
      {"fizzed", "fizz"},       {"failing", "fail"},       {"filing", "file"},
      {"happy", "happi"},       {"sky", "sky"},            {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"},   {"valenci", "valenc"},
      {"digitizer", "digit"},   {"operator", "oper"},      {"feudalism", "feudal"},
      {"hopeful", "hope"},      {"goodness", "good"},      {"formaliti", "formal"},
      {"triplicate", "triplic"}, {"formative", "form"},    {"electrical", "electr"},
      {"revival", "reviv"},     {"allowance", "allow"},    {"inference", "infer"},
      {"adjustment", "adjust"}, {"probate", "probat"},     {"rate", "rate"},
      {"cease", "ceas"},        {"controll", "control"},   {"roll", "roll"},
      {"generalizations", "gener"}, {"hoping", "hope"},
  };
  for (const auto& [word, stem] : cases) EXPECT_EQ(porter_stem(word), stem) << word;
}

TEST(PorterStemmerTest, ShortAndNonAsciiWordsUntouched) {
  EXPECT_EQ(porter_stem("as"), "as");
  EXPECT_EQ(porter_stem("a"), "a");
  EXPECT_EQ(porter_stem(""), "");
  EXPECT_EQ(porter_stem("caf\xC3\xA9s"), "caf\xC3\xA9s");
  EXPECT_EQ(porter_stem("Running"), "Running");
}

}  // namespace
}  // namespace evalcard
