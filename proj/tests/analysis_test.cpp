// Copyright 2026 The Storyworld Authors
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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "storyworld/analysis.hpp"
#include "support/fixtures.hpp"

namespace storyworld {
namespace {

namespace fs = std::filesystem;

RunConfig cards_config() {
  RunConfig c;
  c.story_path = "cards.story";
  c.sample_k = 64;
  c.seed = 7;
  c.questions = {"true -> wears(ali,blue)"};
  return c;
}

TEST(Analysis, FixtureReport) {
  AnalysisReport r = run_analysis(cards_config(), testing::kCardsStory);
  EXPECT_EQ(r.atoms, 8u);
  ASSERT_EQ(r.steps.size(), 2u);
  EXPECT_EQ(r.steps[0].worlds, 64u);
  EXPECT_EQ(r.steps[1].worlds, 32u);
  EXPECT_EQ(r.steps[0].sample_size, 64u);
  EXPECT_EQ(r.steps[0].ewc, std::optional<Rational>(Rational(1, 2)));
  EXPECT_EQ(r.steps[1].ewc, std::optional<Rational>(Rational(1)));
  EXPECT_EQ(r.accuracy.accuracy, Rational(1));
  EXPECT_TRUE(r.accuracy.commutes);
  EXPECT_TRUE(r.kernels.empty());
  // The first canonical world of the final fabula: only the asserted atoms true.
  EXPECT_EQ(r.truth_world,
            (std::vector<std::string>{"plays(ali,jay)", "wears(ali,blue)", "wears(jay,blue)"}));
  EXPECT_EQ(r.timeline_accuracy.matched, 3u);
  EXPECT_EQ(r.timeline_accuracy.undetermined, 5u);
}

TEST(Analysis, CorruptChannelAccuracy) {
  RunConfig c = cards_config();
  c.channel = "corrupt:wears(jay,blue)";
  AnalysisReport r = run_analysis(c, testing::kCardsStory);
  EXPECT_EQ(r.accuracy.accuracy, Rational(7, 8));
  EXPECT_EQ(r.accuracy.mismatched, 1u);
  EXPECT_EQ(r.timeline_accuracy.mismatched, 1u);
}

TEST(Analysis, DropChannelLeavesUndetermined) {
  RunConfig c = cards_config();
  c.channel = "drop:wears(ali,blue)";
  AnalysisReport r = run_analysis(c, testing::kCardsStory);
  EXPECT_EQ(r.steps[1].worlds, 64u);
  EXPECT_EQ(r.accuracy.mismatched, 0u);
  EXPECT_EQ(r.accuracy.undetermined, 1u);
}

TEST(Analysis, RenameChannel) {
  RunConfig c = cards_config();
  c.channel = "rename:wears=dons";
  c.questions = {"true -> dons(ali,blue)"};
  AnalysisReport r = run_analysis(c, testing::kCardsStory);
  EXPECT_EQ(r.accuracy.accuracy, Rational(1));
  EXPECT_EQ(r.steps[0].ewc, std::optional<Rational>(Rational(1, 2)));
}

TEST(Analysis, ThetaZeroFlagsEveryChangingStep) {
  RunConfig c = cards_config();
  c.theta = Rational(0);
  AnalysisReport r = run_analysis(c, testing::kCardsStory);
  EXPECT_EQ(r.kernels, std::vector<std::size_t>{1});
  ASSERT_EQ(r.etc.size(), 1u);
  EXPECT_EQ(r.etc[0].value, Rational(1, 2));
}

TEST(Analysis, DerivedQuestionsWhenNoneConfigured) {
  RunConfig c;
  c.sample_k = 8;
  c.seed = 3;
  AnalysisReport r = run_analysis(c, testing::kCardsStory);
  for (const auto& s : r.steps)
    if (s.ewc) {
      EXPECT_GT(*s.ewc, Rational(1, 2));
    }
}

TEST(Analysis, TruthSelector) {
  RunConfig c = cards_config();
  c.truth = "wears(jay,red);!plays(jay,jay)";
  AnalysisReport r = run_analysis(c, testing::kCardsStory);
  EXPECT_NE(std::find(r.truth_world.begin(), r.truth_world.end(), "wears(jay,red)"),
            r.truth_world.end());
  c.truth = "!wears(ali,blue)";
  EXPECT_THROW(run_analysis(c, testing::kCardsStory), InconsistencyError);
}

TEST(Analysis, ConfigValidation) {
  RunConfig c = cards_config();
  c.channel = "scramble";
  EXPECT_THROW(run_analysis(c, testing::kCardsStory), StoryError);
  c = cards_config();
  c.sample_k = 0;
  EXPECT_THROW(c.validate(), StoryError);
  c = cards_config();
  c.format = "xml";
  EXPECT_THROW(c.validate(), StoryError);
  c = cards_config();
  c.bound = 4;
  EXPECT_THROW(run_analysis(c, testing::kCardsStory), BoundError);
}

TEST(Analysis, ConfigJson) {
  RunConfig c;
  apply_config_json(nlohmann::json::parse(R"j({"seed": 9, "theta": "1/4", "epsilon": 0.5,
      "channel": "identity", "questions": ["true -> wears(ali,blue)"]})j"),
                    c);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.theta, Rational(1, 4));
  EXPECT_EQ(c.epsilon, 0.5);
  EXPECT_EQ(c.questions.size(), 1u);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"sneed": 1})"), c), StoryError);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse("[1]"), c), StoryError);
}

TEST(Analysis, JsonAndCsvAreDeterministic) {
  AnalysisReport a = run_analysis(cards_config(), testing::kCardsStory);
  AnalysisReport b = run_analysis(cards_config(), testing::kCardsStory);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_EQ(to_csv(a), to_csv(b));
  auto doc = nlohmann::json::parse(to_json(a));
  EXPECT_EQ(doc["steps"][0]["ewc"]["num"], 1);
  EXPECT_EQ(doc["steps"][0]["ewc"]["den"], 2);
  EXPECT_EQ(doc["accuracy"]["commutes"], true);
  std::string csv = to_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  EXPECT_NE(csv.find("\n0,64,2,64,1,1,2,0.5,1,false,0,1,0\n"), std::string::npos) << csv;
}

TEST(Analysis, ParseChannel) {
  auto u = testing::cards_universe();
  EXPECT_EQ(parse_channel("drop:wears(jay,blue); plays(ali,jay)", *u).targets().size(), 2u);
  EXPECT_EQ(parse_channel("rename:wears=dons,plays=knows", *u).correspondence().size(), 2u);
  EXPECT_THROW(parse_channel("rename:likes=x", *u), StoryError);
  EXPECT_THROW(parse_channel("rename:wears", *u), StoryError);
  EXPECT_THROW(parse_channel("drop:", *u), StoryError);
}

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(STORYWORLD_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("storyworld_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
  fs::path dir;
  const std::string stories = STORYWORLD_STORIES_DIR;
};

TEST_F(Cli, ValidateExitCodes) {
  EXPECT_EQ(run_cli("validate " + stories + "/cards.story").code, 0);
  EXPECT_EQ(run_cli("validate " + write("bad.story", "sort c: a\nrel p(c)\nt=0:\n  + q(a)\n")).code, 1);
  EXPECT_EQ(run_cli("validate " + write("clash.story", "sort c: a\nrel p(c)\nt=0:\n  + p(a)\n  + !p(a)\n")).code, 2);
  EXPECT_EQ(run_cli("validate " + (dir / "missing.story").string()).code, 3);
  EXPECT_EQ(run_cli("validate --bound 4 " + stories + "/cards.story").code, 1);
  EXPECT_EQ(run_cli("frobnicate").code, 1);
}

TEST_F(Cli, EnumerateCounts) {
  CliRun r = run_cli("enumerate " + stories + "/cards.story");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "64\n");
  EXPECT_EQ(run_cli("enumerate --t 1 " + stories + "/cards.story").out, "32\n");
  CliRun one = run_cli("enumerate -t 1 --list " + stories + "/cards.story");
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(one.out.substr(0, 3), "32\n");
  EXPECT_EQ(std::count(one.out.begin(), one.out.end(), '\n'), 33);
  EXPECT_NE(one.out.find("{plays(ali,jay), wears(ali,blue), wears(jay,blue)}"), std::string::npos);
  EXPECT_EQ(run_cli("enumerate -t 5 " + stories + "/cards.story").code, 1);
}

TEST_F(Cli, AnalyzeIdentityAndCorrupt) {
  CliRun ok = run_cli("analyze --config " + stories + "/cards.json");
  ASSERT_EQ(ok.code, 0);
  auto doc = nlohmann::json::parse(ok.out);
  EXPECT_EQ(doc["accuracy"]["accuracy"]["value"], 1.0);
  EXPECT_EQ(doc["steps"][0]["worlds"], 64);

  CliRun bad = run_cli("analyze --config " + stories + "/cards.json --channel 'corrupt:wears(jay,blue)'");
  ASSERT_EQ(bad.code, 0);
  auto bdoc = nlohmann::json::parse(bad.out);
  EXPECT_EQ(bdoc["accuracy"]["accuracy"]["num"], 7);
  EXPECT_EQ(bdoc["accuracy"]["accuracy"]["den"], 8);
}

TEST_F(Cli, AnalyzeFlagsOverrideConfigAndOutWritesFile) {
  const std::string out = (dir / "r.csv").string();
  CliRun r = run_cli("analyze --config " + stories + "/cards.json --theta 0 --format csv --out " + out);
  ASSERT_EQ(r.code, 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), kCsvHeader);
  EXPECT_NE(ss.str().find(",true,1,3,"), std::string::npos) << ss.str();
}

TEST_F(Cli, AnalyzeIsByteIdentical) {
  const std::string args = "analyze --config " + stories + "/cards.json --seed 11 --sample-k 5";
  CliRun a = run_cli(args), b = run_cli(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, AnalyzeErrors) {
  EXPECT_EQ(run_cli("analyze --config " + write("c.json", "{\"nope\": 1}")).code, 1);
  EXPECT_EQ(run_cli("analyze --config " + write("d.json", "{not json")).code, 1);
  EXPECT_EQ(run_cli("analyze " + stories + "/cards.story --channel 'corrupt:plays(ali,jay)' --truth 'plays(ali,ali)'").code, 0);
  EXPECT_EQ(run_cli("analyze " + stories + "/cards.story --truth '!wears(ali,blue)'").code, 2);
  EXPECT_EQ(run_cli("analyze").code, 1);
}

}  // namespace
}  // namespace storyworld
