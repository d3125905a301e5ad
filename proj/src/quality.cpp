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

#include "lion_forge/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "lion_forge/error.hpp"

namespace lion_forge::quality {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kBleu1: return "b1";
    case Metric::kBleu2: return "b2";
    case Metric::kBleu3: return "b3";
    case Metric::kBleu4: return "b4";
    case Metric::kMeteor: return "meteor";
    case Metric::kRougeL: return "rouge_l";
    case Metric::kCider: return "cider";
  }
  return "?";
}

namespace {

std::string lower_trim(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

Metric parse_metric(const std::string& name) {
  static const std::map<std::string, Metric> kNames = {
      {"b1", Metric::kBleu1},     {"bleu1", Metric::kBleu1}, {"b@1", Metric::kBleu1},
      {"b2", Metric::kBleu2},     {"bleu2", Metric::kBleu2}, {"b@2", Metric::kBleu2},
      {"b3", Metric::kBleu3},     {"bleu3", Metric::kBleu3}, {"b@3", Metric::kBleu3},
      {"b4", Metric::kBleu4},     {"bleu4", Metric::kBleu4}, {"b@4", Metric::kBleu4},
      {"m", Metric::kMeteor},     {"meteor", Metric::kMeteor},
      {"r", Metric::kRougeL},     {"rouge_l", Metric::kRougeL}, {"rouge-l", Metric::kRougeL},
      {"cider", Metric::kCider},  {"cider-d", Metric::kCider}, {"cider_d", Metric::kCider},
  };
  auto it = kNames.find(name);
  if (it == kNames.end()) throw ValidationError("unknown metric '" + name + "' in MQ combo");
  return it->second;
}

}  // namespace

MQCombo MQCombo::c1() {
  return MQCombo({Metric::kBleu1, Metric::kBleu2, Metric::kBleu3, Metric::kBleu4,
                  Metric::kMeteor, Metric::kRougeL},
                 "C1");
}

MQCombo MQCombo::c2() { return MQCombo({Metric::kBleu4, Metric::kMeteor, Metric::kRougeL}, "C2"); }

MQCombo MQCombo::c3() { return MQCombo({Metric::kMeteor, Metric::kRougeL}, "C3"); }

MQCombo MQCombo::from_members(std::vector<Metric> members) {
  if (members.empty()) throw ValidationError("MQ combo has no members");
  if (std::find(members.begin(), members.end(), Metric::kCider) != members.end()) {
    throw HoldOutViolation("CIDEr is the hold-out metric and cannot be part of an MQ combo");
  }
  std::sort(members.begin(), members.end());
  if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
    throw ValidationError("MQ combo lists a metric twice");
  }
  for (const auto& preset : {c1(), c2(), c3()}) {
    if (preset.members_ == members) return preset;
  }
  std::string name;
  for (auto m : members) {
    if (!name.empty()) name += ",";
    name += metric_name(m);
  }
  return MQCombo(std::move(members), std::move(name));
}

MQCombo MQCombo::parse(std::string_view text) {
  const std::string t = lower_trim(text);
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= t.size()) {
    auto end = t.find_first_of(",+", start);
    if (end == std::string::npos) end = t.size();
    if (end > start) items.push_back(t.substr(start, end - start));
    start = end + 1;
  }
  // The hold-out rule wins over any other complaint about the list.
  for (const auto& item : items) {
    if (item.rfind("cider", 0) == 0) {
      throw HoldOutViolation("CIDEr is the hold-out metric and cannot be part of an MQ combo");
    }
  }
  std::vector<Metric> members;
  for (const auto& item : items) {
    if (item == "c1" || item == "c2" || item == "c3") {
      const auto preset = item == "c1" ? c1() : item == "c2" ? c2() : c3();
      members.insert(members.end(), preset.members().begin(), preset.members().end());
    } else {
      members.push_back(parse_metric(item));
    }
  }
  return from_members(std::move(members));
}

double metric_value(const MetricVector& mv, Metric m) {
  switch (m) {
    case Metric::kBleu1: return mv.b1;
    case Metric::kBleu2: return mv.b2;
    case Metric::kBleu3: return mv.b3;
    case Metric::kBleu4: return mv.b4;
    case Metric::kMeteor: return mv.meteor;
    case Metric::kRougeL: return mv.rouge_l;
    case Metric::kCider:
      throw HoldOutViolation("CIDEr is the hold-out metric and cannot enter MQ");
  }
  return 0.0;
}

double meta_quality(const MetricVector& mv, const MQCombo& combo) {
  double sum = 0.0;
  for (auto m : combo.members()) sum += metric_value(mv, m);
  return sum / static_cast<double>(combo.members().size());
}

double dataset_mq(std::span<const PairScore> scores) {
  if (scores.empty()) throw InvalidArgument("dataset_mq: no samples");
  const auto& tune = scores.front().tune_dataset;
  const auto& eval = scores.front().eval_dataset;
  std::vector<const PairScore*> order;
  order.reserve(scores.size());
  for (const auto& s : scores) {
    if (s.tune_dataset != tune || s.eval_dataset != eval) {
      throw InvalidArgument("dataset_mq: scores mix pairs (" + tune + "," + eval + ") and (" +
                            s.tune_dataset + "," + s.eval_dataset + ")");
    }
    order.push_back(&s);
  }
  std::sort(order.begin(), order.end(),
            [](const PairScore* a, const PairScore* b) { return a->sample_id < b->sample_id; });
  double sum = 0.0;
  for (const auto* s : order) sum += s->mq_s;
  return sum / static_cast<double>(scores.size());
}

DQMatrix::DQMatrix(std::vector<std::string> datasets) : datasets_(std::move(datasets)) {
  std::sort(datasets_.begin(), datasets_.end());
  if (std::adjacent_find(datasets_.begin(), datasets_.end()) != datasets_.end()) {
    throw InvalidArgument("DQMatrix: duplicate dataset id");
  }
}

void DQMatrix::set(const std::string& tune, const std::string& eval, double mq_d) {
  if (tune == eval) throw InvalidArgument("DQMatrix: diagonal is fixed at 1 (" + tune + ")");
  if (!std::binary_search(datasets_.begin(), datasets_.end(), tune) ||
      !std::binary_search(datasets_.begin(), datasets_.end(), eval)) {
    throw InvalidArgument("DQMatrix: unknown pair (" + tune + "," + eval + ")");
  }
  if (!(mq_d >= 0.0 && mq_d <= 1.0)) {
    throw InvalidArgument("DQMatrix: MQ^D(" + tune + "->" + eval + ") outside [0,1]");
  }
  cells_[{tune, eval}] = mq_d;
}

std::optional<double> DQMatrix::get(const std::string& tune, const std::string& eval) const {
  if (tune == eval) return 1.0;
  auto it = cells_.find({tune, eval});
  if (it == cells_.end()) return std::nullopt;
  return it->second;
}

void DQMatrix::require_complete() const {
  for (const auto& t : datasets_) {
    for (const auto& e : datasets_) {
      if (!get(t, e)) throw IncompleteError("incomplete MQ^D matrix: missing (" + t + "," + e + ")");
    }
  }
}

std::map<std::string, double> dataset_quality(const DQMatrix& matrix) {
  matrix.require_complete();
  std::map<std::string, double> dq;
  for (const auto& t : matrix.datasets()) {
    double sum = 1.0;
    for (const auto& i : matrix.datasets()) {
      if (i != t) sum += *matrix.get(t, i);
    }
    dq[t] = sum;
  }
  return dq;
}

double sample_quality(const std::map<std::string, double>& dq,
                      const std::map<std::string, double>& per_tuner_mq_s) {
  double sq = 0.0;
  for (const auto& [tuner, mq_s] : per_tuner_mq_s) {
    auto it = dq.find(tuner);
    if (it == dq.end()) throw IncompleteError("sample_quality: no DQ for tuner " + tuner);
    sq += it->second * mq_s;
  }
  return sq;
}

std::map<std::string, double> dataset_sample_quality(const std::map<std::string, double>& dq,
                                                     const std::string& eval,
                                                     const TunerScores& scores) {
  for (const auto& [tuner, w] : dq) {
    if (tuner == eval) continue;
    if (!scores.contains(tuner)) {
      throw IncompleteError("incomplete MQ^S tensor: no scores from tuner " + tuner + " on " + eval);
    }
  }
  std::set<std::string> samples;
  for (const auto& [tuner, per_sample] : scores) {
    if (tuner == eval) throw InvalidArgument("dataset_sample_quality: self pair " + eval);
    if (!dq.contains(tuner)) throw IncompleteError("sample_quality: no DQ for tuner " + tuner);
    for (const auto& [id, v] : per_sample) samples.insert(id);
  }
  std::map<std::string, double> out;
  for (const auto& id : samples) {
    std::map<std::string, double> per_tuner;
    for (const auto& [tuner, per_sample] : scores) {
      auto it = per_sample.find(id);
      if (it == per_sample.end()) {
        throw IncompleteError("incomplete MQ^S tensor: missing (" + tuner + "," + eval + "," + id +
                              ")");
      }
      per_tuner.emplace(tuner, it->second);
    }
    out.emplace(id, sample_quality(dq, per_tuner));
  }
  return out;
}

void QualityReport::check_invariants() const {
  const double n = static_cast<double>(dq.size());
  double total = 0.0;
  for (const auto& [d, v] : dq) {
    if (!(v >= 1.0 && v <= n * (1.0 + 1e-12))) throw ValidationError("DQ of " + d + " outside [1, |S|]");
    total += v;
  }
  for (const auto& [d, per_sample] : sq) {
    auto it = dq.find(d);
    const double bound = total - (it == dq.end() ? 0.0 : it->second);
    for (const auto& [id, v] : per_sample) {
      if (!(v >= 0.0) || v > bound * (1.0 + 1e-12)) {
        throw ValidationError("SQ of " + d + "/" + id + " outside [0, sum of other DQ]");
      }
    }
  }
}

nlohmann::json QualityReport::to_json() const {
  nlohmann::json doc;
  doc["combo"] = combo;
  doc["dq"] = dq;
  doc["sq"] = sq;
  doc["provenance"] = provenance;
  return doc;
}

QualityReport QualityReport::from_json(const nlohmann::json& doc) {
  QualityReport r;
  try {
    r.combo = doc.at("combo").get<std::string>();
    r.dq = doc.at("dq").get<std::map<std::string, double>>();
    r.sq = doc.at("sq").get<std::map<std::string, std::map<std::string, double>>>();
    if (doc.contains("provenance")) r.provenance = doc.at("provenance");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed quality report: ") + e.what());
  }
  return r;
}

std::vector<int> competition_ranks(std::span<const double> values) {
  std::vector<int> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int better = 0;
    for (double v : values) {
      if (v > values[i]) ++better;
    }
    ranks[i] = better + 1;
  }
  return ranks;
}

double rank_agreement(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("rank_agreement: length mismatch");
  auto sign = [](double d) { return d > 0 ? 1 : (d < 0 ? -1 : 0); };
  std::size_t pairs = 0, agree = 0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t b = a + 1; b < x.size(); ++b) {
      ++pairs;
      if (sign(x[a] - x[b]) == sign(y[a] - y[b])) ++agree;
    }
  }
  return pairs == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(pairs);
}

}  // namespace lion_forge::quality
