// Copyright 2026 The dlerl Authors.
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

#include "dlerl/harness.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dlerl {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string data(const std::string& name) {
  return std::string(DLERL_TEST_DATA_DIR) + "/" + name;
}

std::vector<json> lines_of(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("dlerl-test-" + std::to_string(::testing::UnitTest::GetInstance()
                                                 ->random_seed()) +
             "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(Harness, ParseReportsBadLines) {
  std::ostringstream out;
  const int rc = cmd_parse({data("raw_responses.txt"), std::nullopt, std::nullopt},
                           out);
  EXPECT_EQ(rc, kExitInvalidLines);
  const auto recs = lines_of(out.str());
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs[0]["type"], "header");
  EXPECT_EQ(recs[0]["command"], "parse");
  EXPECT_TRUE(recs[1]["ok"].get<bool>());
  EXPECT_EQ(recs[2]["response"]["label"], "TAMPERED");
  EXPECT_FALSE(recs[3]["ok"].get<bool>());
  EXPECT_FALSE(recs[3]["violations"].empty());
}

TEST(Harness, ScoreSortsAndSummarizes) {
  std::ostringstream out;
  EXPECT_EQ(cmd_score({data("responses.jsonl"), data("manifest.jsonl"), ""}, out),
            kExitOk);
  const auto recs = lines_of(out.str());
  ASSERT_EQ(recs.size(), 10u);
  EXPECT_EQ(recs[1]["sample_id"], "aud-001");
  for (size_t i = 2; i < 9; ++i) {
    EXPECT_LT(recs[i - 1]["sample_id"].get<std::string>(),
              recs[i]["sample_id"].get<std::string>());
  }
  const json& img1 = recs[5];
  ASSERT_EQ(img1["sample_id"], "img-001");
  EXPECT_EQ(img1["total"].get<double>(), 2.8);
  EXPECT_EQ(recs[9]["type"], "summary");
  EXPECT_EQ(recs[9]["count"], 8);
}

TEST(Harness, EvaluateJsonAndText) {
  std::ostringstream js, tx;
  EXPECT_EQ(cmd_evaluate({data("responses.jsonl"), data("manifest.jsonl"), 0.5,
                          true},
                         js),
            kExitOk);
  const auto recs = lines_of(js.str());
  ASSERT_EQ(recs.size(), 2u);
  const json& report = recs[1];
  EXPECT_EQ(report["tau"], 0.5);
  ASSERT_EQ(report["modalities"].size(), 4u);
  const json& image = report["modalities"][0];
  EXPECT_EQ(image["modality"], "image");
  EXPECT_NEAR(image["accuracy"].get<double>(), 2.0 / 3.0, 1e-12);
  const json& audio = report["modalities"][1];
  EXPECT_EQ(audio["unparseable"], 1);

  EXPECT_EQ(cmd_evaluate({data("responses.jsonl"), data("manifest.jsonl"), 0.5,
                          false},
                         tx),
            kExitOk);
  EXPECT_EQ(tx.str().rfind("# ", 0), 0u);
  EXPECT_NE(tx.str().find("0.6667"), std::string::npos);
}

TEST(Harness, CurriculumPlanWritesDeterministicBundles) {
  TempDir a, b;
  std::ostringstream out_a, out_b;
  EXPECT_EQ(cmd_curriculum_plan({{data("manifest.jsonl")}, 0.5, 3,
                                 a.path().string()},
                                out_a),
            kExitOk);
  cmd_curriculum_plan({{data("manifest.jsonl")}, 0.5, 3, b.path().string()},
                      out_b);
  for (int k = 1; k <= 4; ++k) {
    const std::string name = "stage_" + std::to_string(k) + ".jsonl";
    ASSERT_TRUE(fs::exists(a.path() / name)) << name;
    EXPECT_EQ(read_file(a.path() / name), read_file(b.path() / name));
  }
  // Stage 2 adds 3 images and replays floor(0.5 * 2) = 1 audio sample.
  std::istringstream s2(read_file(a.path() / "stage_2.jsonl"));
  EXPECT_EQ(read_sample_records(s2).size(), 4u);
  const json plan = json::parse(read_file(a.path() / "plan.json"));
  EXPECT_EQ(plan["stages"].size(), 4u);
  const auto recs = lines_of(out_a.str());
  EXPECT_EQ(recs.front()["type"], "header");
}

TEST(Harness, TrainToyIsDeterministic) {
  TempDir dir;
  auto run = [&](const std::string& tag, std::string& stdout_text) {
    TrainToyCommand c;
    c.gspo.steps = 300;
    c.gspo.seed = 5;
    c.eval_episodes = 50;
    c.history = (dir.path() / (tag + ".jsonl")).string();
    c.checkpoint = (dir.path() / (tag + ".json")).string();
    std::ostringstream out;
    EXPECT_EQ(cmd_train_toy(c, out), kExitOk);
    stdout_text = out.str();
  };
  std::string a, b;
  run("a", a);
  run("b", b);
  const auto ra = lines_of(a), rb = lines_of(b);
  ASSERT_EQ(ra.size(), 2u);
  EXPECT_EQ(ra[1], rb[1]);
  EXPECT_EQ(read_file(dir.path() / "a.jsonl"), read_file(dir.path() / "b.jsonl"));
  EXPECT_EQ(read_file(dir.path() / "a.json"), read_file(dir.path() / "b.json"));
  EXPECT_EQ(lines_of(read_file(dir.path() / "a.jsonl")).size(), 301u);
  EXPECT_EQ(ra[1]["steps"], 300);
}

TEST(Harness, ErrorsMapToExitCodes) {
  EXPECT_EQ(exit_code_for(Error(ErrorCode::kIoError, "x")), kExitInputError);
  EXPECT_EQ(exit_code_for(Error(ErrorCode::kMissingModality, "x")),
            kExitInputError);
  EXPECT_EQ(exit_code_for(Error(ErrorCode::kDivergence, "x")),
            kExitInternalError);
  EXPECT_EQ(exit_code_for(Error(ErrorCode::kNonFinite, "x")),
            kExitInternalError);

  std::ostringstream out;
  try {
    cmd_score({data("missing.jsonl"), data("manifest.jsonl"), ""}, out);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
  TrainToyCommand bad;
  bad.gspo.group_size = 1;
  bad.history = "/dev/null";
  try {
    cmd_train_toy(bad, out);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(exit_code_for(e), kExitInputError);
  }
}

}  // namespace
}  // namespace dlerl
