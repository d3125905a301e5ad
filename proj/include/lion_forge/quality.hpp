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

// Meta, dataset and sample quality.
//
//   MQ    mean of a combo's caption metrics for one (tuner, eval set) pair,
//         either per sample (MQ^S) or averaged over a dataset (MQ^D)
//   DQ_T  1 + sum over i != T of MQ^D(T -> i)
//   SQ    sum over tuners i != E of DQ_i * MQ^S(i -> E) for a sample of E
//
// All reductions run in ascending (dataset id, sample id) order so results
// are bitwise reproducible.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lion_forge/text_metrics.hpp"

namespace lion_forge::quality {

using metrics::MetricVector;

enum class Metric { kBleu1, kBleu2, kBleu3, kBleu4, kMeteor, kRougeL, kCider };

std::string_view metric_name(Metric m);

/// Which metrics are averaged into MQ. CIDEr is the hold-out metric and can
/// never be a member.
class MQCombo {
 public:
  static MQCombo c1();  // B@1, B@2, B@3, B@4, M, R
  static MQCombo c2();  // B@4, M, R
  static MQCombo c3();  // M, R

  /// "C1" / "C2" / "C3" (case-insensitive) or a comma separated member list
  /// such as "b4,meteor,rouge_l". Throws HoldOutViolation if CIDEr appears and
  /// ValidationError for unknown names.
  static MQCombo parse(std::string_view text);
  static MQCombo from_members(std::vector<Metric> members);

  const std::vector<Metric>& members() const { return members_; }
  const std::string& name() const { return name_; }

  bool operator==(const MQCombo& o) const { return members_ == o.members_; }

 private:
  MQCombo(std::vector<Metric> members, std::string name)
      : members_(std::move(members)), name_(std::move(name)) {}

  std::vector<Metric> members_;
  std::string name_;
};

double metric_value(const MetricVector& mv, Metric m);

/// Arithmetic mean of the combo's members.
double meta_quality(const MetricVector& mv, const MQCombo& combo);

struct PairScore {
  std::string tune_dataset;
  std::string eval_dataset;
  std::string sample_id;
  MetricVector metrics;
  double mq_s = 0.0;
  // Prediction was empty or absent (--allow-missing); metrics are zero.
  bool empty_output = false;
  bool missing = false;
};

/// MQ^D: mean of mq_s over samples, summed in ascending sample_id order.
double dataset_mq(std::span<const PairScore> scores);

/// MQ^D(T -> i) over an ordered dataset set. The diagonal is fixed at 1.
class DQMatrix {
 public:
  explicit DQMatrix(std::vector<std::string> datasets);

  const std::vector<std::string>& datasets() const { return datasets_; }

  void set(const std::string& tune, const std::string& eval, double mq_d);
  std::optional<double> get(const std::string& tune, const std::string& eval) const;

  /// Throws IncompleteError naming the first missing (tune, eval) pair.
  void require_complete() const;

 private:
  std::vector<std::string> datasets_;
  std::map<std::pair<std::string, std::string>, double> cells_;
};

/// DQ_T = 1 + sum_{i != T} MQ^D(T -> i).
std::map<std::string, double> dataset_quality(const DQMatrix& matrix);

/// SQ = sum over tuners (ascending id) of dq[tuner] * mq_s[tuner].
double sample_quality(const std::map<std::string, double>& dq,
                      const std::map<std::string, double>& per_tuner_mq_s);

/// Per-sample MQ^S for one evaluation dataset, keyed tuner -> sample -> MQ^S.
using TunerScores = std::map<std::string, std::map<std::string, double>>;

/// SQ for every sample of eval dataset `eval`. Tuners must be exactly
/// dq's datasets minus `eval`, each scoring every sample.
std::map<std::string, double> dataset_sample_quality(const std::map<std::string, double>& dq,
                                                     const std::string& eval,
                                                     const TunerScores& scores);

struct QualityReport {
  std::string combo;
  std::map<std::string, double> dq;
  // dataset -> sample id -> SQ
  std::map<std::string, std::map<std::string, double>> sq;
  nlohmann::json provenance = nlohmann::json::object();

  /// Checks 1 <= DQ_T <= |S| and 0 <= SQ <= sum of the other datasets' DQ.
  void check_invariants() const;

  nlohmann::json to_json() const;
  static QualityReport from_json(const nlohmann::json& doc);
};

/// Standard competition ranks, 1 = largest value. Ties share the best rank.
std::vector<int> competition_ranks(std::span<const double> values);

/// Fraction of unordered pairs (a, b) where sign(x_a - x_b) == sign(y_a - y_b),
/// ties included as a sign of zero. 1.0 for fewer than two items.
double rank_agreement(std::span<const double> x, std::span<const double> y);

}  // namespace lion_forge::quality
