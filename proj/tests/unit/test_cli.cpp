// Copyright 2026 The lion-forge Authors
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

#include <cstdlib>

#include "fixtures.hpp"
#include "lion_forge/digest.hpp"

namespace lf = lion_forge;
namespace fs = std::filesystem;
using fixtures::run_cli;

namespace {

struct Workspace {
  fixtures::TempDir dir;
  std::vector<std::string> datasets;

  Workspace() {
    for (const auto* name : {"alpha", "beta", "gamma"}) {
      datasets.push_back(fixtures::write_dataset(fixtures::make_corpus(name, 10, 8), dir / "raw"));
    }
  }

  std::vector<std::string> with_datasets(std::vector<std::string> args) const {
    for (const auto& d : datasets) {
      args.push_back("--dataset");
      args.push_back(d);
    }
    return args;
  }

  std::string predictions() const {
    const auto out = (dir / "mock").string();
    const auto r = run_cli(with_datasets({"mock-generate", "--mode", "dropout", "--out", out}));
    EXPECT_EQ(r.exit_code, 0) << r.output;
    return out + "/predictions.jsonl";
  }
};

}  // namespace

TEST(Cli, VersionAndHelp) {
  const auto v = run_cli({"--version"});
  EXPECT_EQ(v.exit_code, 0);
  EXPECT_NE(v.output.find(std::string(lf::kToolVersion)), std::string::npos);
  EXPECT_EQ(run_cli({"--help"}).exit_code, 0);
  EXPECT_EQ(run_cli({"score", "--help"}).exit_code, 0);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}).exit_code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).exit_code, 1);
  EXPECT_EQ(run_cli({"score", "--out", "/tmp/x"}).exit_code, 1);
}

TEST(Cli, ScoreSucceeds) {
  Workspace ws;
  const auto preds = ws.predictions();
  const auto out = (ws.dir / "score").string();
  const auto r = run_cli(ws.with_datasets({"score", "--predictions", preds, "--out", out}));
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("wrote"), std::string::npos);
  const auto v = run_cli({"verify", ws.dir.path().string()});
  EXPECT_EQ(v.exit_code, 0) << v.output;
  EXPECT_NE(v.output.find("3 manifests, 0 problems"), std::string::npos);
}

TEST(Cli, CiderComboIsRejected) {
  Workspace ws;
  const auto preds = ws.predictions();
  const auto out = (ws.dir / "score").string();
  for (const auto* combo : {"cider", "C1,cider", "b4+CIDEr-D"}) {
    const auto r = run_cli(ws.with_datasets({"score", "--predictions", preds, "--combo", combo, "--out", out}));
    EXPECT_EQ(r.exit_code, 1) << combo;
    EXPECT_NE(r.output.find("CIDEr"), std::string::npos) << r.output;
  }
  EXPECT_FALSE(fs::exists(ws.dir / "score/manifest.json"));
}

TEST(Cli, CiderComboInConfigFile) {
  Workspace ws;
  const auto preds = ws.predictions();
  lf::write_file(ws.dir / "run.ini", "[score]\ncombo = \"b1,cider\"\n");
  const auto r = run_cli(ws.with_datasets({"--config", (ws.dir / "run.ini").string(), "score", "--predictions",
                                           preds, "--out", (ws.dir / "score").string()}));
  EXPECT_EQ(r.exit_code, 1) << r.output;

  lf::write_file(ws.dir / "ok.ini", "[score]\ncombo = \"C3\"\n");
  const auto ok = run_cli(ws.with_datasets({"--config", (ws.dir / "ok.ini").string(), "score", "--predictions",
                                            preds, "--out", (ws.dir / "score").string()}));
  EXPECT_EQ(ok.exit_code, 0) << ok.output;
  EXPECT_NE(lf::read_file(ws.dir / "score/score_report.json").find("\"C3\""), std::string::npos);
}

TEST(Cli, MissingPredictionExitsTwo) {
  Workspace ws;
  const auto preds = ws.predictions();
  auto text = lf::read_file(preds);
  const auto cut = text.find("\"id\":\"s0004\"");
  ASSERT_NE(cut, std::string::npos);
  const auto start = text.rfind('\n', cut) + 1;
  const auto end = text.find('\n', cut) + 1;
  const auto removed = text.substr(start, end - start);
  text.erase(start, end - start);
  lf::write_file(ws.dir / "short.jsonl", text);
  const auto r = run_cli(ws.with_datasets(
      {"score", "--predictions", (ws.dir / "short.jsonl").string(), "--out", (ws.dir / "score").string()}));
  EXPECT_EQ(r.exit_code, 2) << r.output;
  EXPECT_NE(r.output.find("(alpha,beta,s0004)"), std::string::npos) << r.output << removed;

  const auto lenient = run_cli(ws.with_datasets({"score", "--allow-missing", "--predictions",
                                                 (ws.dir / "short.jsonl").string(), "--out",
                                                 (ws.dir / "score").string()}));
  EXPECT_EQ(lenient.exit_code, 0) << lenient.output;
  EXPECT_NE(lenient.output.find("warning:"), std::string::npos);
}

TEST(Cli, MalformedDatasetExitsOne) {
  Workspace ws;
  lf::write_file(ws.dir / "bad.jsonl", "{\"id\":\"x\"}\n");
  const auto r = run_cli({"prepare", "--dataset", "bad=" + (ws.dir / "bad.jsonl").string(), "--out",
                          (ws.dir / "prep").string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("bad.jsonl:1"), std::string::npos) << r.output;
}

TEST(Cli, WorkersFromEnvironmentDoNotChangeOutput) {
  Workspace ws;
  const auto preds = ws.predictions();
  const auto one = run_cli(ws.with_datasets(
      {"score", "--workers", "1", "--predictions", preds, "--out", (ws.dir / "s1").string()}));
  ASSERT_EQ(one.exit_code, 0) << one.output;
  ::setenv("LION_FORGE_WORKERS", "5", 1);
  const auto env = run_cli(ws.with_datasets({"score", "--predictions", preds, "--out", (ws.dir / "s5").string()}));
  ::unsetenv("LION_FORGE_WORKERS");
  ASSERT_EQ(env.exit_code, 0) << env.output;
  EXPECT_EQ(fixtures::read_tree(ws.dir / "s1"), fixtures::read_tree(ws.dir / "s5"));
  EXPECT_EQ(run_cli(ws.with_datasets({"score", "--workers", "0", "--predictions", preds, "--out",
                                      (ws.dir / "s0").string()}))
                .exit_code,
            1);
}

TEST(Cli, VerifyDetectsTampering) {
  Workspace ws;
  const auto preds = ws.predictions();
  lf::write_file(preds, lf::read_file(preds) + "\n");
  const auto r = run_cli({"verify", ws.dir.path().string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("FAIL"), std::string::npos);
  EXPECT_NE(r.output.find("predictions.jsonl"), std::string::npos);
}

TEST(Cli, ReportAliasRunsBenchEval) {
  Workspace ws;
  auto eval = fixtures::make_corpus("held", 5, 2);
  const auto eval_arg = fixtures::write_dataset(eval, ws.dir / "eval");
  std::vector<fixtures::PredictionLine> lines;
  for (const auto& s : eval.samples()) lines.push_back({"modelA", "held", s.id, s.answer});
  fixtures::write_predictions(ws.dir / "p.jsonl", lines);
  const auto r = run_cli({"report", "--eval", eval_arg, "--predictions", (ws.dir / "p.jsonl").string(), "--out",
                          (ws.dir / "bench").string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto csv = lf::read_file(ws.dir / "bench/bench.csv");
  EXPECT_NE(csv.find("modelA,all,5,1.000000"), std::string::npos) << csv;
}

TEST(Cli, FlagsOverrideConfigFile) {
  Workspace ws;
  const auto preds = ws.predictions();
  lf::write_file(ws.dir / "run.ini", "[score]\ncombo = \"C3\"\n");
  const auto r = run_cli(ws.with_datasets({"--config", (ws.dir / "run.ini").string(), "score", "--combo", "C2",
                                           "--predictions", preds, "--out", (ws.dir / "score").string()}));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(lf::read_file(ws.dir / "score/score_report.json").find("\"C2\""), std::string::npos);
}

TEST(Cli, PrepareTwoSeedsGivesTwoPartitions) {
  Workspace ws;
  const auto out = (ws.dir / "prep").string();
  const auto r = run_cli(ws.with_datasets({"prepare", "--seed", "1,2", "--eval-n", "2", "--out", out}));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto a = lf::read_file(ws.dir / "prep/split_1/alpha.split.json");
  const auto b = lf::read_file(ws.dir / "prep/split_2/alpha.split.json");
  EXPECT_NE(a, b);
  const auto missing = run_cli({"prepare", "--dataset", "x=/no/such.jsonl", "--out", out});
  EXPECT_EQ(missing.exit_code, 1);
  EXPECT_NE(missing.output.find("/no/such.jsonl"), std::string::npos);
}
