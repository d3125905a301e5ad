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

// lion_forge command line. Exit codes: 0 success, 1 validation error,
// 2 incomplete inputs.

#include <cstdint>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "lion_forge/digest.hpp"
#include "lion_forge/error.hpp"
#include "lion_forge/pipeline.hpp"

namespace lf = lion_forge;
namespace pl = lion_forge::pipeline;

namespace {

int report(const pl::Outcome& outcome) {
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& m : outcome.messages) std::cout << m << "\n";
  std::cout << "wrote " << outcome.files.size() << " files\n";
  return 0;
}

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void add_workers(CLI::App* sub, int& workers) {
  sub->add_option("--workers", workers, "scoring threads")
      ->envname("LION_FORGE_WORKERS")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lion_forge: tune-cross-evaluation quality scoring and dataset refinement"};
  app.set_version_flag("--version", std::string(lf::kToolVersion));
  app.set_config("--config", "", "flat key=value config file; [command] sections or command.key");
  app.require_subcommand(1);
  app.fallthrough();

  std::function<pl::Outcome()> action;
  std::function<int()> raw_action;

  // prepare
  pl::PrepareConfig prep;
  std::vector<std::uint64_t> seeds;
  bool no_eval600 = false;
  auto* c_prep = app.add_subcommand("prepare", "dedup, split and build the Eval600 set");
  c_prep->add_option("--dataset", prep.datasets, "NAME=path.jsonl (repeatable)")->required();
  c_prep->add_option("--dedup", prep.dedup, "TARGET=SOURCE: drop TARGET samples overlapping SOURCE");
  c_prep->add_option("--seed", seeds, "split seed; one output directory per seed")->delimiter(',');
  c_prep->add_option("--train-fraction", prep.train_fraction, "fraction kept for tuning");
  c_prep->add_option("--eval-n", prep.eval_n, "Eval600 samples per dataset");
  c_prep->add_flag("--no-eval600", no_eval600, "skip the Eval600 set");
  c_prep->add_option("--out", prep.out, "output directory")->required();
  c_prep->callback([&] {
    if (!seeds.empty()) prep.seeds = seeds;
    prep.eval600 = !no_eval600;
    action = [&] { return pl::prepare(prep); };
  });

  // mock-generate
  pl::MockConfig mock;
  std::string mock_mode = "echo";
  std::string mock_eval600;
  auto* c_mock = app.add_subcommand("mock-generate", "write synthetic predictions for every planned cell");
  c_mock->add_option("--dataset", mock.datasets, "NAME=path.jsonl (repeatable)")->required();
  c_mock->add_option("--eval600", mock_eval600, "Eval600 corpus to cover as well");
  c_mock->add_option("--mode", mock_mode, "echo, dropout or gibberish");
  c_mock->add_option("--rate", mock.rate, "word dropout rate");
  c_mock->add_option("--tuner-mode", mock.tuner_modes, "TUNER=mode override");
  c_mock->add_option("--tuner-rate", mock.tuner_rates, "TUNER=rate override");
  c_mock->add_option("--seed", mock.seed, "generation seed");
  c_mock->add_option("--out", mock.out, "output directory")->required();
  c_mock->callback([&] {
    mock.mode = pl::parse_mock_mode(mock_mode);
    if (!mock_eval600.empty()) mock.eval600 = mock_eval600;
    action = [&] { return pl::mock_generate(mock); };
  });

  // score
  pl::ScoreConfig sc;
  sc.workers = default_workers();
  std::string sc_eval600;
  auto* c_score = app.add_subcommand("score", "score predictions into the cross-evaluation tensor");
  c_score->add_option("--dataset", sc.datasets, "NAME=path.jsonl (repeatable)")->required();
  c_score->add_option("--eval600", sc_eval600, "Eval600 corpus");
  c_score->add_option("--predictions", sc.predictions, "prediction JSONL files")->required();
  c_score->add_option("--combo", sc.combo, "C1, C2, C3 or a metric list");
  c_score->add_flag("--allow-missing", sc.allow_missing, "score absent predictions as 0");
  c_score->add_flag("--cider", sc.cider, "also record CIDEr per sample");
  add_workers(c_score, sc.workers);
  c_score->add_option("--out", sc.out, "output directory")->required();
  c_score->callback([&] {
    if (!sc_eval600.empty()) sc.eval600 = sc_eval600;
    action = [&] { return pl::score(sc); };
  });

  // quality
  pl::QualityConfig qc;
  std::string qc_combo;
  auto* c_quality = app.add_subcommand("quality", "DQ table and per-sample SQ");
  c_quality->add_option("--tensor", qc.tensor, "score output directory")->required();
  c_quality->add_option("--combo", qc_combo, "defaults to the tensor's combo");
  c_quality->add_option("--out", qc.out, "output directory")->required();
  c_quality->callback([&] {
    if (!qc_combo.empty()) qc.combo = qc_combo;
    action = [&] { return pl::quality(qc); };
  });

  // ablate-mq
  pl::AblateConfig ab;
  auto* c_ablate = app.add_subcommand("ablate-mq", "compare DQ and Eval600 rankings across combos");
  c_ablate->add_option("--tensor", ab.tensor, "score output directory")->required();
  c_ablate->add_option("--combos", ab.combos, "combos to compare")->delimiter(';');
  c_ablate->add_option("--out", ab.out, "output directory")->required();
  c_ablate->callback([&] { action = [&] { return pl::ablate_mq(ab); }; });

  // refine
  pl::RefineCmdConfig rf;
  std::vector<double> portions, lambdas;
  auto* c_refine = app.add_subcommand("refine", "select samples by SQ (S1, S2, S3)");
  c_refine->add_option("--quality", rf.quality, "quality output directory or report")->required();
  c_refine->add_option("--dataset", rf.datasets, "NAME=path.jsonl (repeatable)")->required();
  c_refine->add_option("--strategy", rf.strategy, "S1, S2 or S3");
  c_refine->add_option("--portion", portions, "P values for S1/S2")->delimiter(',');
  c_refine->add_option("--lambda", lambdas, "lambda values for S3")->delimiter(',');
  c_refine->add_option("--seed", rf.seed, "S2 sampling seed");
  c_refine->add_option("--out", rf.out, "output directory")->required();
  c_refine->callback([&] {
    if (!portions.empty()) rf.portions = portions;
    if (!lambdas.empty()) rf.lambdas = lambdas;
    action = [&] { return pl::refine(rf); };
  });

  // assemble
  pl::AssembleConfig as;
  auto* c_assemble = app.add_subcommand("assemble", "build the refined tune and eval corpora");
  c_assemble->add_option("--selection", as.selection, "selection file from refine")->required();
  c_assemble->add_option("--dataset", as.datasets, "NAME=path.jsonl (repeatable)")->required();
  c_assemble->add_option("--eval-n", as.eval_n, "eval samples per dataset");
  c_assemble->add_option("--seed", as.seed, "eval draw seed");
  c_assemble->add_option("--name", as.name, "output corpus prefix");
  c_assemble->add_option("--out", as.out, "output directory")->required();
  c_assemble->callback([&] { action = [&] { return pl::assemble(as); }; });

  // sq-cases
  pl::SqCasesConfig cases;
  auto* c_cases = app.add_subcommand("sq-cases", "top and bottom SQ samples with tuner outputs");
  c_cases->add_option("--quality", cases.quality, "quality output directory or report")->required();
  c_cases->add_option("--tensor", cases.tensor, "score output directory")->required();
  c_cases->add_option("--dataset", cases.datasets, "NAME=path.jsonl for sample text");
  c_cases->add_option("-k", cases.k, "samples per side");
  c_cases->add_option("--out", cases.out, "output directory")->required();
  c_cases->callback([&] { action = [&] { return pl::sq_cases(cases); }; });

  // bench-eval
  pl::BenchEvalConfig be;
  be.workers = default_workers();
  auto* c_bench = app.add_subcommand("bench-eval", "score model predictions on an eval set, CIDEr included");
  c_bench->alias("report");
  c_bench->add_option("--eval", be.eval, "NAME=path.jsonl")->required();
  c_bench->add_option("--predictions", be.predictions, "prediction JSONL files")->required();
  c_bench->add_option("--combo", be.combo, "MQ combo");
  c_bench->add_flag("--allow-missing", be.allow_missing, "score absent predictions as 0");
  add_workers(c_bench, be.workers);
  c_bench->add_option("--out", be.out, "output directory")->required();
  c_bench->callback([&] { action = [&] { return pl::bench_eval(be); }; });

  // verify
  std::string verify_root;
  auto* c_verify = app.add_subcommand("verify", "re-check the digests of every manifest under a path");
  c_verify->add_option("path", verify_root, "artifact directory")->required();
  c_verify->callback([&] {
    raw_action = [&] {
      std::size_t checked = 0;
      const auto problems = pl::verify(verify_root, &checked);
      for (const auto& p : problems) std::cout << "FAIL " << p << "\n";
      std::cout << checked << " manifests, " << problems.size() << " problems\n";
      return problems.empty() ? 0 : 1;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests come through here with exit code 0.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const lf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (raw_action) return raw_action();
    return report(action());
  } catch (const lf::IncompleteError& e) {
    std::cerr << "incomplete: " << e.what() << "\n";
    return 2;
  } catch (const lf::HoldOutViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
