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

// Tune-cross-evaluation grid: every dataset in turn is the tuning set and all
// others are evaluation sets. Predictions come from files produced elsewhere;
// this module indexes them, scores every (tuner, eval set, sample) cell and
// reduces the results in a fixed order.
//
// Prediction file (JSON Lines): {"tune_dataset", "eval_dataset", "id", "output"}.
// Tensor artifact: a directory with one canonical JSON file per pair plus
// manifest.json listing every file's SHA-256.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "lion_forge/corpus.hpp"
#include "lion_forge/quality.hpp"

namespace lion_forge::cross_eval {

using corpus::Corpus;
using quality::MQCombo;
using quality::PairScore;

/// Dataset id -> corpus. The Eval600 set, when used, is registered under
/// corpus::kEval600Id.
using Registry = std::map<std::string, Corpus>;

struct RunPair {
  std::string tune;
  std::string eval;

  auto operator<=>(const RunPair&) const = default;
};

struct RunPlan {
  std::vector<std::string> datasets;  // sorted
  std::vector<RunPair> pairs;         // cross pairs, then (T, eval600) pairs
  bool include_eval600 = false;

  bool contains(const std::string& tune, const std::string& eval) const;
  std::size_t cross_pair_count() const;
};

/// All ordered (T, E) with T != E in lexical order, optionally followed by
/// (T, eval600) for every T.
RunPlan plan_runs(std::vector<std::string> registry, bool include_eval600 = false);

class PredictionStore {
 public:
  using Key = std::tuple<std::string, std::string, std::string>;  // tune, eval, id

  const std::string* find(const std::string& tune, const std::string& eval,
                          const std::string& id) const;
  std::size_t size() const { return outputs_.size(); }

  /// Cells of the plan with no prediction, in plan/corpus order.
  const std::vector<Key>& missing() const { return missing_; }

 private:
  friend PredictionStore ingest_predictions(const std::vector<std::filesystem::path>&,
                                            const RunPlan&, const Registry&, bool, bool);
  std::map<Key, std::string> outputs_;
  std::map<Key, std::string> origin_;
  std::vector<Key> missing_;
};

/// Parses and indexes prediction files. Unknown pairs or ids and duplicate
/// cells are LoadErrors at the offending file:line. In strict mode a missing
/// cell is an IncompleteError naming (T, E, id); otherwise it is recorded in
/// missing(). With skip_unplanned, records for pairs outside the plan are
/// ignored instead of rejected.
PredictionStore ingest_predictions(const std::vector<std::filesystem::path>& paths,
                                   const RunPlan& plan, const Registry& corpora,
                                   bool strict = true, bool skip_unplanned = false);

struct PairResult {
  RunPair pair;
  std::vector<PairScore> scores;  // ascending sample id
  std::vector<std::string> outputs;
  double mq_d = 0.0;
  std::optional<double> mean_cider;
  std::size_t empty_outputs = 0;
  std::size_t missing = 0;
};

struct ScoreOptions {
  int workers = 1;
  bool with_cider = false;
  bool allow_missing = false;
};

/// Scores one pair. Empty outputs score 0 and are counted; absent predictions
/// are an IncompleteError unless allow_missing.
PairResult score_pair(const RunPair& pair, const PredictionStore& store, const Registry& corpora,
                      const MQCombo& combo, const ScoreOptions& options = {});

class ScoreTensor {
 public:
  ScoreTensor() = default;
  ScoreTensor(std::vector<std::string> datasets, std::string combo,
              std::vector<PairResult> pairs);

  const std::vector<std::string>& datasets() const { return datasets_; }
  const std::string& combo() const { return combo_; }
  const std::vector<PairResult>& pairs() const { return pairs_; }

  const PairResult* find(const std::string& tune, const std::string& eval) const;

  /// MQ^D of the cross pairs under `combo`, recomputed from stored metrics.
  quality::DQMatrix matrix(const MQCombo& combo) const;

  /// MQ^S(i -> eval) for every tuner i and sample of `eval`.
  quality::TunerScores tuner_scores(const std::string& eval, const MQCombo& combo) const;

  /// MQ^D(T -> eval600) per tuner under `combo`; empty if not planned.
  std::map<std::string, double> eval600_mq(const MQCombo& combo) const;

  std::size_t missing_cells() const;
  std::size_t empty_outputs() const;

 private:
  std::vector<std::string> datasets_;
  std::string combo_;
  std::vector<PairResult> pairs_;
};

/// Scores every planned pair on a pool of options.workers threads. Each cell
/// writes its own slot and reductions happen afterwards in canonical order,
/// so the result does not depend on the worker count.
ScoreTensor build_tensor(const RunPlan& plan, const PredictionStore& store,
                         const Registry& corpora, const MQCombo& combo,
                         const ScoreOptions& options = {});

quality::QualityReport quality_report(const ScoreTensor& tensor, const MQCombo& combo);

nlohmann::json pair_to_json(const PairResult& result, const std::string& combo);
PairResult pair_from_json(const nlohmann::json& doc);

/// Writes pair files and manifest.json into dir. Returns relative path ->
/// SHA-256 of every file written, manifest included.
std::map<std::string, std::string> write_tensor(const ScoreTensor& tensor,
                                                const std::filesystem::path& dir,
                                                const nlohmann::json& provenance);

ScoreTensor read_tensor(const std::filesystem::path& dir);

/// Square MQ^D matrix, diagonal 1, rows = tuners, columns = eval sets.
std::string mqd_matrix_csv(const ScoreTensor& tensor, const MQCombo& combo);

/// Radar data: one row per tuner, one column per eval set (including eval600
/// when planned), self cells left blank.
std::string radar_csv(const ScoreTensor& tensor, const MQCombo& combo);

/// Runs f(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f);

}  // namespace lion_forge::cross_eval
