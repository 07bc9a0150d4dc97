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

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"
#include "test_support.hpp"

namespace evalcard::cli {
namespace {

using testing::data_path;
using testing::read_file;
using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<nlohmann::json> parse_jsonl(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
  return out;
}

std::string stub_command_line(const std::string& mode) {
  return std::string(EVALCARD_PYTHON) + " " + EVALCARD_STUB_SCORER + " --mode " + mode;
}

TEST(CliHelpTest, EverySubcommandDocumentsEveryFlag) {
  const std::map<std::string, std::vector<std::string>> flags = {
      {"score", {"--metric", "--pairs", "--format", "--out", "--command", "--timeout-ms", "--jobs",
                 "--no-lowercase", "--stem", "--remove-stopwords"}},
      {"corrupt", {"--pairs", "--level", "--seed", "--ops", "--rate", "--format", "--out",
                   "--no-lowercase", "--stem", "--remove-stopwords"}},
      {"scorecard", {"--config", "--out", "--format", "--jobs"}},
      {"convert-stsb", {"--in", "--out"}},
      {"group-mnli", {"--in", "--format", "--out"}},
  };
  for (const auto& [cmd, expected] : flags) {
    const auto r = run_cli({cmd, "--help"});
    EXPECT_EQ(r.code, kOk) << cmd;
    for (const auto& f : expected) EXPECT_NE(r.out.find(f), std::string::npos) << cmd << " " << f;
  }
  const auto top = run_cli({"--help"});
  EXPECT_EQ(top.code, kOk);
  for (const auto& [cmd, expected] : flags) EXPECT_NE(top.out.find(cmd), std::string::npos);
}

TEST(CliHelpTest, RealBinaryExitCodes) {
  const std::string bin = EVALCARD_CLI_BINARY;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status(bin + " score --help"), 0);
  EXPECT_EQ(status(bin), 1);
  EXPECT_EQ(status(bin + " score --metric rouge1 --pairs /nonexistent.tsv"), 2);
  EXPECT_EQ(status(bin + " score --metric rouge1 --pairs " + data_path("identical_pairs.tsv").string()), 0);
}

TEST(CliUsageTest, MissingOrBadArguments) {
  EXPECT_EQ(run_cli({}).code, kUsage);
  EXPECT_EQ(run_cli({"score", "--metric", "bleu"}).code, kUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kUsage);
  EXPECT_EQ(run_cli({"corrupt", "--pairs", data_path("pairs_small.tsv").string(), "--level", "1",
                     "--seed", "1", "--ops", "explode"})
                .code,
            kUsage);
}

TEST(CliScoreTest, IdenticalPairsScoreOne) {
  const auto r = run_cli({"score", "--metric", "rouge1", "--pairs", data_path("identical_pairs.tsv").string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(r.out, "id-1\t1\nid-2\t1\nid-3\t1\n");
}

TEST(CliScoreTest, UnknownMetricListsRegisteredMetrics) {
  const auto r = run_cli({"score", "--metric", "meteor", "--pairs", data_path("pairs_small.tsv").string()});
  EXPECT_EQ(r.code, kUsage);
  for (const char* name : {"bleu", "rouge1", "rouge2", "rougeL"})
    EXPECT_NE(r.err.find(name), std::string::npos) << r.err;
}

TEST(CliScoreTest, MissingFileNamesPath) {
  const auto r = run_cli({"score", "--metric", "bleu", "--pairs", "/nonexistent/dir/pairs.tsv"});
  EXPECT_EQ(r.code, kData);
  EXPECT_NE(r.err.find("/nonexistent/dir/pairs.tsv"), std::string::npos) << r.err;
}

TEST(CliScoreTest, MalformedFileIsDataError) {
  TempDir dir;
  testing::write_file(dir / "bad.tsv", "a\tr\th\nb\tonly-two\n");
  const auto r = run_cli({"score", "--metric", "bleu", "--pairs", (dir / "bad.tsv").string()});
  EXPECT_EQ(r.code, kData);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(CliScoreTest, ExternalScorer) {
  const auto pairs = data_path("identical_pairs.tsv").string();
  const auto ok = run_cli({"score", "--metric", "stub", "--command", stub_command_line("echo"),
                           "--pairs", pairs});
  ASSERT_EQ(ok.code, kOk) << ok.err;
  EXPECT_EQ(ok.out, "id-1\t1\nid-2\t1\nid-3\t1\n");

  const auto absent = run_cli({"score", "--metric", "x", "--command", "/nonexistent/scorer",
                               "--pairs", pairs});
  EXPECT_EQ(absent.code, kScorer);

  const auto errors = run_cli({"score", "--metric", "stub", "--command", stub_command_line("error-odd"),
                               "--pairs", pairs});
  EXPECT_EQ(errors.code, kScorer);
  EXPECT_EQ(errors.out, "id-1\t0.5\nid-2\terror\nid-3\t0.5\n");
}

TEST(CliScoreTest, OutFileAndJobsGiveSameBytes) {
  TempDir dir;
  const auto pairs = data_path("pairs_500.tsv").string();
  ASSERT_EQ(run_cli({"score", "--metric", "bleu", "--pairs", pairs, "--out", (dir / "a.tsv").string()}).code, kOk);
  ASSERT_EQ(run_cli({"score", "--metric", "bleu", "--pairs", pairs, "--jobs", "4", "--out",
                     (dir / "b.tsv").string()})
                .code,
            kOk);
  const auto a = read_file(dir / "a.tsv");
  EXPECT_EQ(a, read_file(dir / "b.tsv"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 500);
}

TEST(CliCorruptTest, LevelZeroLeavesPairsUnchanged) {
  const auto r = run_cli({"corrupt", "--pairs", data_path("pairs_small.tsv").string(), "--level", "0",
                          "--seed", "3"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto rows = parse_jsonl(r.out);
  std::istringstream in(read_file(data_path("pairs_small.tsv")));
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const auto tab1 = line.find('\t'), tab2 = line.find('\t', tab1 + 1);
    ASSERT_LT(i, rows.size());
    EXPECT_EQ(rows[i]["id"], line.substr(0, tab1));
    EXPECT_EQ(rows[i]["reference"], line.substr(tab1 + 1, tab2 - tab1 - 1));
    EXPECT_EQ(rows[i]["hypothesis"], line.substr(tab2 + 1));
    EXPECT_EQ(rows[i]["edits"], 0);
    ++i;
  }
  EXPECT_EQ(i, rows.size());
}

TEST(CliCorruptTest, DeterministicAndMonotoneInLevel) {
  const auto pairs = data_path("pairs_500.tsv").string();
  const auto once = run_cli({"corrupt", "--pairs", pairs, "--level", "1", "--seed", "11"});
  const auto twice = run_cli({"corrupt", "--pairs", pairs, "--level", "1", "--seed", "11"});
  ASSERT_EQ(once.code, kOk);
  EXPECT_EQ(once.out, twice.out);

  const auto level2 = run_cli({"corrupt", "--pairs", pairs, "--level", "2", "--seed", "11"});
  const auto a = parse_jsonl(once.out), b = parse_jsonl(level2.out);
  ASSERT_EQ(a.size(), 500u);
  ASSERT_EQ(b.size(), 500u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]["reference"], b[i]["reference"]);
    EXPECT_GE(b[i]["edits"].get<int>(), a[i]["edits"].get<int>());
  }
}

TEST(CliScorecardTest, BuiltinsOnTinyFixtures) {
  TempDir dir;
  const auto r = run_cli({"scorecard", "--config", data_path("golden_config.json").string(),
                          "--out", (dir / "report.json").string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto doc = nlohmann::json::parse(read_file(dir / "report.json"));
  ASSERT_EQ(doc["body"]["criteria"].size(), 3u);
  for (const auto& c : doc["body"]["criteria"]) EXPECT_EQ(c["results"].size(), 4u);

  const auto md = run_cli({"scorecard", "--config", data_path("golden_config.json").string(),
                           "--format", "markdown"});
  ASSERT_EQ(md.code, kOk);
  EXPECT_NE(md.out.find("| | bleu | rouge1 | rouge2 | rougeL |"), std::string::npos) << md.out;
}

TEST(CliScorecardTest, ReportBodyMatchesGoldenForAnyJobs) {
  const std::string golden = read_file(data_path("golden_report_body.json"));
  for (const char* jobs : {"1", "3", "8"}) {
    const auto r = run_cli({"scorecard", "--config", data_path("golden_config.json").string(), "--jobs", jobs});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto doc = nlohmann::ordered_json::parse(r.out);
    EXPECT_EQ(doc["schema"], "scorecard/1");
    EXPECT_EQ(doc["body"].dump(2) + "\n", golden) << "jobs " << jobs;
  }
}

TEST(CliScorecardTest, AbsentScorerExitsBeforeAnyCriterion) {
  TempDir dir;
  testing::write_file(dir / "config.json", R"({
    "metrics": ["rouge1", {"name": "neural", "command": ["/nonexistent/neural-scorer"]}],
    "similarity": {"path": ")" + data_path("similarity_small.tsv").string() + R"("}
  })");
  const auto r = run_cli({"scorecard", "--config", (dir / "config.json").string()});
  EXPECT_EQ(r.code, kScorer);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("neural"), std::string::npos) << r.err;
}

TEST(CliScorecardTest, ConfigErrors) {
  TempDir dir;
  EXPECT_EQ(run_cli({"scorecard", "--config", (dir / "missing.json").string()}).code, kData);
  testing::write_file(dir / "bad.json", "{ not json");
  EXPECT_EQ(run_cli({"scorecard", "--config", (dir / "bad.json").string()}).code, kUsage);
  testing::write_file(dir / "nometrics.json", R"({"metrics": [], "similarity": {"path": "x"}})");
  EXPECT_EQ(run_cli({"scorecard", "--config", (dir / "nometrics.json").string()}).code, kUsage);
  testing::write_file(dir / "nofile.json", R"({"metrics": ["bleu"], "similarity": {"path": "x.tsv"}})");
  EXPECT_EQ(run_cli({"scorecard", "--config", (dir / "nofile.json").string()}).code, kData);
}

TEST(CliConvertTest, StsbAndMnli) {
  TempDir dir;
  testing::write_file(dir / "sts.csv",
                      "main-captions\tMSRvid\t2012test\t0001\t3.800\tA plane is taking off.\t"
                      "An air plane is taking off.\n");
  const auto sts = run_cli({"convert-stsb", "--in", (dir / "sts.csv").string()});
  ASSERT_EQ(sts.code, kOk) << sts.err;
  EXPECT_EQ(sts.out, "stsb-1\tA plane is taking off.\tAn air plane is taking off.\t3.8\n");

  const auto mnli = run_cli({"group-mnli", "--in", data_path("mnli_labeled_20.jsonl").string()});
  ASSERT_EQ(mnli.code, kOk) << mnli.err;
  EXPECT_EQ(parse_jsonl(mnli.out).size(), 4u);
  EXPECT_NE(mnli.err.find(":9:"), std::string::npos) << mnli.err;
}

}  // namespace
}  // namespace evalcard::cli
