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

#pragma once

// One function per CLI subcommand. Each writes its artifacts plus a
// manifest.json into an output directory. Manifests record the tool version,
// a digest of the semantic configuration (never paths or worker counts) and
// the SHA-256 of every input and output, so identical inputs give
// byte-identical directories.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lion_forge/cross_eval.hpp"

namespace lion_forge::pipeline {

namespace fs = std::filesystem;

struct DatasetArg {
  std::string id;
  fs::path path;
};

/// "NAME=path" or a bare path (id = file stem).
DatasetArg parse_dataset_arg(const std::string& arg);

/// "KEY=VALUE" split at the first '='.
std::pair<std::string, std::string> parse_assignment(const std::string& arg, const char* what);

cross_eval::Registry load_registry(const std::vector<std::string>& dataset_args,
                                   std::vector<std::string>* warnings = nullptr);

struct Outcome {
  std::map<std::string, std::string> files;  // relative path -> SHA-256
  std::vector<std::string> warnings;
  std::vector<std::string> messages;
};

// ---------------------------------------------------------------- prepare
struct PrepareConfig {
  std::vector<std::string> datasets;
  std::vector<std::string> dedup;  // "TARGET=SOURCE"
  std::vector<std::uint64_t> seeds{0};
  double train_fraction = 0.8;
  std::size_t eval_n = 600;
  bool eval600 = true;
  fs::path out;
};
Outcome prepare(const PrepareConfig& config);

// ---------------------------------------------------------- mock-generate
enum class MockMode { kEcho, kDropout, kGibberish };
MockMode parse_mock_mode(const std::string& name);

/// Synthetic "model output" for a reference answer.
std::string mock_output(const std::string& answer, MockMode mode, double rate, std::uint64_t seed);

struct MockConfig {
  std::vector<std::string> datasets;
  std::optional<fs::path> eval600;
  MockMode mode = MockMode::kEcho;
  double rate = 0.3;
  std::vector<std::string> tuner_modes;  // "TUNER=mode"
  std::vector<std::string> tuner_rates;  // "TUNER=rate"
  std::uint64_t seed = 0;
  fs::path out;  // predictions file
};
Outcome mock_generate(const MockConfig& config);

// ------------------------------------------------------------------ score
struct ScoreConfig {
  std::vector<std::string> datasets;
  std::optional<fs::path> eval600;
  std::vector<fs::path> predictions;
  std::string combo = "C1";
  bool allow_missing = false;
  bool cider = false;
  int workers = 1;
  fs::path out;
};
Outcome score(const ScoreConfig& config);

// ---------------------------------------------------------------- quality
struct QualityConfig {
  fs::path tensor;                 // score output dir (or its tensor/ subdir)
  std::optional<std::string> combo;  // defaults to the tensor's combo
  fs::path out;
};
Outcome quality(const QualityConfig& config);

// -------------------------------------------------------------- ablate-mq
struct AblateConfig {
  fs::path tensor;
  std::vector<std::string> combos{"C1", "C2", "C3"};
  fs::path out;
};
Outcome ablate_mq(const AblateConfig& config);

// ----------------------------------------------------------------- refine
struct RefineCmdConfig {
  fs::path quality;  // quality output dir or quality_report.json
  std::vector<std::string> datasets;
  std::string strategy = "S1";
  std::vector<double> portions{0.7};
  std::vector<double> lambdas{1.0};
  std::uint64_t seed = 0;
  fs::path out;
};
Outcome refine(const RefineCmdConfig& config);

// --------------------------------------------------------------- assemble
struct AssembleConfig {
  fs::path selection;  // one file written by refine
  std::vector<std::string> datasets;
  std::size_t eval_n = 600;
  std::uint64_t seed = 0;
  std::string name = "revo_lion";
  fs::path out;
};
Outcome assemble(const AssembleConfig& config);

// --------------------------------------------------------------- sq-cases
struct SqCasesConfig {
  fs::path quality;
  fs::path tensor;
  std::vector<std::string> datasets;
  std::size_t k = 3;
  fs::path out;
};
Outcome sq_cases(const SqCasesConfig& config);

// ------------------------------------------------------------- bench-eval
struct BenchEvalConfig {
  std::string eval;  // "NAME=path" of the evaluation corpus
  std::vector<fs::path> predictions;
  std::string combo = "C1";
  bool allow_missing = false;
  int workers = 1;
  fs::path out;
};
Outcome bench_eval(const BenchEvalConfig& config);

// ----------------------------------------------------------------- verify
/// Re-checks every manifest.json under root. Returns one line per problem.
std::vector<std::string> verify(const fs::path& root, std::size_t* manifests_checked = nullptr);

}  // namespace lion_forge::pipeline
