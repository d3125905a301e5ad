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

// Sample selection from SQ scores and assembly of the refined corpus.
//
//   S1  top ceil(P * N) samples per dataset by SQ (ties: smaller id first)
//   S2  ceil(P * N) samples per dataset drawn uniformly with a seed
//   S3  samples whose SQ lies in [mu - lambda sigma, mu + lambda sigma],
//       mu and sigma the population mean and standard deviation per dataset

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lion_forge/corpus.hpp"

namespace lion_forge::refine {

using corpus::Corpus;

enum class Strategy { kS1, kS2, kS3 };

std::string strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);

struct RefineConfig {
  Strategy strategy = Strategy::kS1;
  std::optional<double> portion;        // S1, S2
  std::optional<double> lambda;         // S3
  std::optional<std::uint64_t> seed;    // S2

  /// Exactly the chosen strategy's fields must be set, P in (0,1], lambda >= 0.
  void validate() const;
  nlohmann::json params() const;
};

struct Selection {
  std::string dataset;
  Strategy strategy = Strategy::kS1;
  nlohmann::json params = nlohmann::json::object();
  std::optional<double> threshold;                    // S1: SQ of the last selected
  std::optional<std::pair<double, double>> interval;  // S3
  std::vector<std::string> ids;                       // input corpus order
  std::size_t total = 0;
  std::string corpus_digest;

  nlohmann::json to_json() const;
  static Selection from_json(const nlohmann::json& doc);
};

/// ceil(P * N), tolerant of products such as 0.7 * 10 = 7.000000000000001.
std::size_t portion_count(double portion, std::size_t n);

using SampleScores = std::map<std::string, double>;  // sample id -> SQ

Selection refine_s1(const Corpus& corpus, const SampleScores& sq, double portion);
Selection refine_s2(const Corpus& corpus, std::size_t count, std::uint64_t seed);
Selection refine_s3(const Corpus& corpus, const SampleScores& sq, double lambda);

/// Applies config to every corpus; sq maps dataset -> sample scores.
std::vector<Selection> refine_all(const std::map<std::string, Corpus>& corpora,
                                  const std::map<std::string, SampleScores>& sq,
                                  const RefineConfig& config);

struct Assembly {
  Corpus tune;
  Corpus eval;
  nlohmann::json manifest;
};

/// Per dataset, a seeded draw of eval_per_dataset selected samples goes to the
/// evaluation set and the remainder to the tuning set. Output ids are
/// "<dataset>:<id>" with the source tag set.
Assembly assemble_revo_lion(const std::vector<Selection>& selections,
                            const std::map<std::string, Corpus>& corpora,
                            std::size_t eval_per_dataset, std::uint64_t seed,
                            const std::string& name = "revo_lion");

}  // namespace lion_forge::refine
