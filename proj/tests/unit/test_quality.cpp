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

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "lion_forge/error.hpp"
#include "lion_forge/quality.hpp"
#include "lion_forge/random.hpp"

namespace lf = lion_forge;
using namespace lion_forge::quality;
using Exact = boost::multiprecision::cpp_dec_float_50;

namespace {

MetricVector mv(double b1, double b2, double b3, double b4, double m, double r) {
  MetricVector v;
  v.b1 = b1;
  v.b2 = b2;
  v.b3 = b3;
  v.b4 = b4;
  v.meteor = m;
  v.rouge_l = r;
  return v;
}

PairScore score(const std::string& id, double mq) {
  PairScore s;
  s.tune_dataset = "T";
  s.eval_dataset = "E";
  s.sample_id = id;
  s.mq_s = mq;
  return s;
}

}  // namespace

TEST(MQCombo, Presets) {
  EXPECT_EQ(MQCombo::c1().members().size(), 6u);
  EXPECT_EQ(MQCombo::c2().members(), (std::vector<Metric>{Metric::kBleu4, Metric::kMeteor, Metric::kRougeL}));
  EXPECT_EQ(MQCombo::c3().members(), (std::vector<Metric>{Metric::kMeteor, Metric::kRougeL}));
  EXPECT_EQ(MQCombo::parse("c2").name(), "C2");
  EXPECT_EQ(MQCombo::parse("rouge_l, meteor, b@4").name(), "C2");
  EXPECT_EQ(MQCombo::parse("m+r").name(), "C3");
  EXPECT_EQ(MQCombo::parse("b1,m").name(), "b1,meteor");
}

TEST(MQCombo, CiderIsRejectedEverywhere) {
  EXPECT_THROW(MQCombo::parse("cider"), lf::HoldOutViolation);
  EXPECT_THROW(MQCombo::parse("b4,meteor,CIDEr"), lf::HoldOutViolation);
  EXPECT_THROW(MQCombo::parse("C1+cider-d"), lf::HoldOutViolation);
  EXPECT_THROW(MQCombo::parse("bogus,cider"), lf::HoldOutViolation);
  EXPECT_THROW(MQCombo::from_members({Metric::kMeteor, Metric::kCider}), lf::HoldOutViolation);
  EXPECT_THROW(metric_value(MetricVector{}, Metric::kCider), lf::HoldOutViolation);
}

TEST(MQCombo, RejectsMalformedLists) {
  EXPECT_THROW(MQCombo::parse(""), lf::ValidationError);
  EXPECT_THROW(MQCombo::parse("b5"), lf::ValidationError);
  EXPECT_THROW(MQCombo::parse("m,meteor"), lf::ValidationError);
}

TEST(MetaQuality, HandValues) {
  EXPECT_DOUBLE_EQ(meta_quality(mv(1, 1, 1, 1, 1, 1), MQCombo::c1()), 1.0);
  EXPECT_NEAR(meta_quality(mv(0.6, 0.5, 0.4, 0.3, 0.4, 0.5), MQCombo::c1()), 0.45, 1e-15);
  EXPECT_NEAR(meta_quality(mv(0, 0, 0, 0, 0.4, 0.5), MQCombo::c3()), 0.45, 1e-15);
  EXPECT_NEAR(meta_quality(mv(0, 0, 0, 0.3, 0.4, 0.5), MQCombo::c2()), 0.4, 1e-15);
}

TEST(MetaQuality, BoundedByMembers) {
  lf::Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto v = mv(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(),
                      rng.uniform());
    const double q = meta_quality(v, MQCombo::c1());
    const double lo = std::min({v.b1, v.b2, v.b3, v.b4, v.meteor, v.rouge_l});
    const double hi = std::max({v.b1, v.b2, v.b3, v.b4, v.meteor, v.rouge_l});
    EXPECT_GE(q, lo);
    EXPECT_LE(q, hi);
  }
}

TEST(DatasetMq, Mean) {
  std::vector<PairScore> zeros{score("a", 0), score("b", 0)};
  EXPECT_EQ(dataset_mq(zeros), 0.0);
  std::vector<PairScore> two{score("b", 0.4), score("a", 0.2)};
  EXPECT_NEAR(dataset_mq(two), 0.3, 1e-15);
  std::vector<PairScore> one{score("a", 0.7)};
  EXPECT_EQ(dataset_mq(one), 0.7);
  std::vector<PairScore> none;
  EXPECT_THROW(dataset_mq(none), lf::InvalidArgument);
  auto mixed = two;
  mixed[1].eval_dataset = "F";
  EXPECT_THROW(dataset_mq(mixed), lf::InvalidArgument);
}

TEST(DatasetMq, OrderIndependentAndExact) {
  lf::Rng rng(4);
  std::vector<PairScore> scores;
  Exact exact = 0;
  for (int i = 0; i < 500; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "x%03d", i);
    scores.push_back(score(id, rng.uniform()));
    exact += Exact(scores.back().mq_s);
  }
  exact /= 500;
  const double forward = dataset_mq(scores);
  std::reverse(scores.begin(), scores.end());
  EXPECT_EQ(dataset_mq(scores), forward);
  EXPECT_LE(abs(Exact(forward) - exact), Exact(1e-12));
}

TEST(DQMatrix, CellsAndDiagonal) {
  DQMatrix m({"b", "a"});
  EXPECT_EQ(m.datasets(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(m.get("a", "a"), 1.0);
  EXPECT_FALSE(m.get("a", "b").has_value());
  EXPECT_THROW(m.set("a", "a", 0.5), lf::InvalidArgument);
  EXPECT_THROW(m.set("a", "z", 0.5), lf::InvalidArgument);
  EXPECT_THROW(m.set("a", "b", 1.5), lf::InvalidArgument);
  try {
    m.require_complete();
    FAIL() << "expected IncompleteError";
  } catch (const lf::IncompleteError& e) {
    EXPECT_NE(std::string(e.what()).find("(a,b)"), std::string::npos);
  }
  EXPECT_THROW(dataset_quality(m), lf::IncompleteError);
}

TEST(DatasetQuality, HandValues) {
  DQMatrix zero({"a", "b", "c"});
  for (const auto& t : zero.datasets()) {
    for (const auto& e : zero.datasets()) {
      if (t != e) zero.set(t, e, 0.0);
    }
  }
  for (const auto& [d, v] : dataset_quality(zero)) EXPECT_EQ(v, 1.0) << d;

  std::vector<std::string> nine;
  for (char c = 'a'; c < 'a' + 9; ++c) nine.emplace_back(1, c);
  DQMatrix m(nine);
  for (const auto& t : nine) {
    for (const auto& e : nine) {
      if (t != e) m.set(t, e, 0.2);
    }
  }
  for (const auto& [d, v] : dataset_quality(m)) EXPECT_NEAR(v, 2.6, 1e-15);
}

TEST(DatasetQuality, RankingStableUnderScaling) {
  lf::Rng rng(8);
  const std::vector<std::string> ds{"a", "b", "c", "d", "e"};
  DQMatrix m(ds), scaled(ds);
  for (const auto& t : ds) {
    for (const auto& e : ds) {
      if (t == e) continue;
      const double v = rng.uniform() * 0.9;
      m.set(t, e, v);
      scaled.set(t, e, v * 0.5);
    }
  }
  std::vector<double> x, y;
  for (const auto& [_, v] : dataset_quality(m)) x.push_back(v);
  for (const auto& [_, v] : dataset_quality(scaled)) y.push_back(v);
  EXPECT_EQ(competition_ranks(x), competition_ranks(y));
  for (double v : x) {
    EXPECT_GE(v, 1.0);
    EXPECT_LE(v, 5.0);
  }
}

TEST(SampleQuality, HandValues) {
  EXPECT_EQ(sample_quality({{"A", 2}, {"B", 3}}, {{"A", 0}, {"B", 0}}), 0.0);
  EXPECT_NEAR(sample_quality({{"A", 2}, {"B", 3}}, {{"A", 0.5}, {"B", 0.2}}), 1.6, 1e-15);
  EXPECT_NEAR(sample_quality({{"A", 1}}, {{"A", 0.7}}), 0.7, 1e-15);
  EXPECT_THROW(sample_quality({{"A", 1}}, {{"Z", 0.7}}), lf::IncompleteError);
}

TEST(SampleQuality, DatasetLevelChecksCompleteness) {
  const std::map<std::string, double> dq{{"A", 2.0}, {"B", 1.5}, {"E", 1.2}};
  TunerScores scores{{"A", {{"s1", 0.5}, {"s2", 0.1}}}, {"B", {{"s1", 0.2}, {"s2", 0.3}}}};
  const auto sq = dataset_sample_quality(dq, "E", scores);
  EXPECT_NEAR(sq.at("s1"), 2.0 * 0.5 + 1.5 * 0.2, 1e-15);
  EXPECT_NEAR(sq.at("s2"), 2.0 * 0.1 + 1.5 * 0.3, 1e-15);

  auto missing_tuner = scores;
  missing_tuner.erase("B");
  EXPECT_THROW(dataset_sample_quality(dq, "E", missing_tuner), lf::IncompleteError);
  auto missing_sample = scores;
  missing_sample["B"].erase("s2");
  try {
    dataset_sample_quality(dq, "E", missing_sample);
    FAIL() << "expected IncompleteError";
  } catch (const lf::IncompleteError& e) {
    EXPECT_NE(std::string(e.what()).find("(B,E,s2)"), std::string::npos);
  }
}

TEST(SampleQuality, LinearDominanceAndScaling) {
  lf::Rng rng(12);
  const std::map<std::string, double> dq{{"A", 2.2}, {"B", 1.4}, {"C", 2.9}};
  std::map<std::string, double> doubled;
  for (const auto& [k, v] : dq) doubled[k] = 2.0 * v;
  for (int t = 0; t < 200; ++t) {
    std::map<std::string, double> a, b;
    for (const auto& [k, _] : dq) {
      b[k] = rng.uniform() * 0.5;
      a[k] = b[k] + rng.uniform() * 0.5;
    }
    EXPECT_GE(sample_quality(dq, a), sample_quality(dq, b));
    EXPECT_NEAR(sample_quality(doubled, a), 2.0 * sample_quality(dq, a), 1e-12);
  }
}

TEST(SampleQuality, MatchesArbitraryPrecision) {
  lf::Rng rng(31);
  const std::vector<std::string> ds{"d0", "d1", "d2", "d3"};
  DQMatrix m(ds);
  std::map<std::pair<std::string, std::string>, Exact> exact_cells;
  for (const auto& t : ds) {
    for (const auto& e : ds) {
      if (t == e) continue;
      const double v = rng.uniform();
      m.set(t, e, v);
      exact_cells[{t, e}] = Exact(v);
    }
  }
  const auto dq = dataset_quality(m);
  std::map<std::string, Exact> exact_dq;
  for (const auto& t : ds) {
    Exact sum = 1;
    for (const auto& e : ds) {
      if (t != e) sum += exact_cells[{t, e}];
    }
    exact_dq[t] = sum;
    EXPECT_LE(abs(Exact(dq.at(t)) - sum), Exact(1e-12));
  }
  for (int s = 0; s < 50; ++s) {
    std::map<std::string, double> per_tuner;
    Exact want = 0;
    for (const auto& t : {"d0", "d1", "d2"}) {
      per_tuner[t] = rng.uniform();
      want += exact_dq[t] * Exact(per_tuner[t]);
    }
    EXPECT_LE(abs(Exact(sample_quality(dq, per_tuner)) - want), Exact(1e-12));
  }
}

TEST(QualityReport, InvariantsAndRoundTrip) {
  QualityReport r;
  r.combo = "C1";
  r.dq = {{"A", 1.5}, {"B", 2.0}};
  r.sq = {{"A", {{"s1", 1.0}}}, {"B", {{"s1", 1.5}}}};
  EXPECT_NO_THROW(r.check_invariants());
  const auto back = QualityReport::from_json(nlohmann::json::parse(r.to_json().dump()));
  EXPECT_EQ(back.dq, r.dq);
  EXPECT_EQ(back.sq, r.sq);
  EXPECT_EQ(back.combo, "C1");

  auto bad_dq = r;
  bad_dq.dq["A"] = 0.5;
  EXPECT_THROW(bad_dq.check_invariants(), lf::ValidationError);
  auto bad_sq = r;
  bad_sq.sq["A"]["s1"] = 2.5;  // above DQ_B
  EXPECT_THROW(bad_sq.check_invariants(), lf::ValidationError);
  EXPECT_THROW(QualityReport::from_json({{"dq", 1}}), lf::ValidationError);
}

TEST(Ranking, CompetitionRanksAndAgreement) {
  const std::vector<double> v{0.3, 0.9, 0.3, 0.1};
  EXPECT_EQ(competition_ranks(v), (std::vector<int>{2, 1, 2, 4}));
  const std::vector<double> same{1, 1, 1};
  EXPECT_EQ(competition_ranks(same), (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(rank_agreement(same, same), 1.0);
  const std::vector<double> x{1, 2, 3}, rev{3, 2, 1};
  EXPECT_EQ(rank_agreement(x, x), 1.0);
  EXPECT_EQ(rank_agreement(x, rev), 0.0);
  const std::vector<double> one{5};
  EXPECT_EQ(rank_agreement(one, one), 1.0);
  EXPECT_THROW(rank_agreement(x, one), lf::InvalidArgument);
}
