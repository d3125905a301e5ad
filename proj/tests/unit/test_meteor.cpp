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

#include <cmath>
#include <utility>

#include "lion_forge/random.hpp"
#include "lion_forge/text_metrics.hpp"
#include "oracles.hpp"

namespace lf = lion_forge;
using namespace lion_forge::metrics;

TEST(PorterStem, ReferenceVocabulary) {
  const std::pair<const char*, const char*> cases[] = {
      {"caresses", "caress"},     {"ponies", "poni"},         {"ties", "ti"},
      {"caress", "caress"},       {"cats", "cat"},            {"cat", "cat"},
      {"feed", "feed"},           {"agreed", "agre"},         {"plastered", "plaster"},
      {"bled", "bled"},           {"motoring", "motor"},      {"sing", "sing"},
      {"conflated", "conflat"},   {"troubled", "troubl"},     {"sized", "size"},
      {"hopping", "hop"},         {"tanned", "tan"},          {"falling", "fall"},
      {"hissing", "hiss"},        {"fizzed", "fizz"},         {"failing", "fail"},
      {"filing", "file"},         {"happy", "happi"},         {"sky", "sky"},
      {"relational", "relat"},    {"conditional", "condit"},  {"rational", "ration"},
      {"digitizer", "digit"},     {"operator", "oper"},       {"feudalism", "feudal"},
      {"decisiveness", "decis"},  {"hopefulness", "hope"},    {"callousness", "callous"},
      {"formative", "form"},      {"formalize", "formal"},    {"electrical", "electr"},
      {"hopeful", "hope"},        {"goodness", "good"},       {"revival", "reviv"},
      {"allowance", "allow"},     {"inference", "infer"},     {"airliner", "airlin"},
      {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"},   {"defensible", "defens"},
      {"irritant", "irrit"},      {"replacement", "replac"},  {"adjustment", "adjust"},
      {"dependent", "depend"},    {"adoption", "adopt"},      {"communism", "commun"},
      {"activate", "activ"},      {"homologous", "homolog"},  {"effective", "effect"},
      {"bowdlerize", "bowdler"},  {"probate", "probat"},      {"rate", "rate"},
      {"cease", "ceas"},          {"controlling", "control"}, {"rolling", "roll"},
      {"generalizations", "gener"}, {"oscillators", "oscil"}, {"running", "run"},
      {"is", "is"},               {"a", "a"},
  };
  for (const auto& [word, stem] : cases) EXPECT_EQ(porter_stem(word), stem) << word;
}

TEST(Meteor, IdenticalSequencesScoreOne) {
  EXPECT_DOUBLE_EQ(meteor({"a", "b", "c"}, {"a", "b", "c"}), 1.0);
  EXPECT_DOUBLE_EQ(meteor({"cat"}, {"cat"}), 1.0);
}

TEST(Meteor, FormulaOnPartialMatch) {
  // m = 3, P = 1, R = 3/4, one chunk.
  const double fmean = 0.75 / (0.9 + 0.1 * 0.75);
  const double expected = fmean * (1.0 - 0.5 / 27.0);
  EXPECT_NEAR(meteor({"a", "b", "c"}, {"a", "b", "c", "d"}), expected, 1e-15);
  // Candidate a c d against a x c d: chunks {a} and {c d}.
  const auto al = meteor_align({"a", "c", "d"}, {"a", "x", "c", "d"});
  EXPECT_EQ(al.matches, 3u);
  EXPECT_EQ(al.chunks, 2u);
  EXPECT_NEAR(meteor_from_stats(3, 2, 3, 4), (0.75 / 0.975) * (1.0 - 0.5 * std::pow(2.0 / 3.0, 3)),
              1e-15);
}

TEST(Meteor, ZeroWithoutMatches) {
  EXPECT_EQ(meteor({"a"}, {"b"}), 0.0);
  EXPECT_EQ(meteor({}, {"b"}), 0.0);
  EXPECT_EQ(meteor({"a"}, {}), 0.0);
}

TEST(Meteor, StemStageMatchesLeftovers) {
  const auto al = meteor_align({"dogs", "running"}, {"dog", "runs"});
  EXPECT_EQ(al.ref_of, (std::vector<int>{0, 1}));
  EXPECT_EQ(al.matches, 2u);
  EXPECT_EQ(al.chunks, 1u);
  // Exact matches take priority over stem matches of the same word.
  const auto mixed = meteor_align({"cat", "cats"}, {"cats", "cat"});
  EXPECT_EQ(mixed.ref_of, (std::vector<int>{1, 0}));
}

TEST(Meteor, PrefersFewerChunksThenLeftmost) {
  // Both "a" candidates could take the single reference "a"; the one next to
  // "b" keeps a single chunk.
  const auto al = meteor_align({"a", "x", "a", "b"}, {"a", "b"});
  EXPECT_EQ(al.ref_of, (std::vector<int>{-1, -1, 0, 1}));
  EXPECT_EQ(al.chunks, 1u);
  // Equal chunk counts: earlier candidate positions win.
  const auto tie = meteor_align({"a", "a"}, {"a"});
  EXPECT_EQ(tie.ref_of, (std::vector<int>{0, -1}));
}

TEST(Meteor, MatchesExhaustiveOracle) {
  static const char* words[] = {"cat", "cats", "run", "running", "runs", "the",
                                "a",   "dog", "dogs", "jump",   "jumped"};
  lf::Rng rng(29);
  for (int t = 0; t < 400; ++t) {
    auto draw = [&](std::size_t lo, std::size_t hi) {
      TokenSeq s;
      const auto n = lo + rng.below(hi - lo + 1);
      const auto vocab = 3 + rng.below(9);
      for (std::size_t i = 0; i < n; ++i) s.push_back(words[rng.below(vocab)]);
      return s;
    };
    const auto cand = draw(1, 7);
    const auto ref = draw(1, 7);
    const auto got = meteor_align(cand, ref);
    const auto want = oracle::meteor(cand, ref);
    ASSERT_FALSE(got.truncated);
    ASSERT_EQ(got.ref_of, want.ref_of) << "trial " << t;
    ASSERT_EQ(got.chunks, want.chunks);
    ASSERT_NEAR(meteor(cand, ref), want.score, 1e-12);
  }
}

TEST(Meteor, LongRepetitiveInputsStayExact) {
  TokenSeq cand, ref;
  for (int i = 0; i < 30; ++i) {
    cand.push_back(i % 3 == 0 ? "the" : i % 3 == 1 ? "a" : "cat");
    ref.push_back(i % 2 == 0 ? "the" : "cat");
  }
  const auto al = meteor_align(cand, ref);
  EXPECT_FALSE(al.truncated);
  const double s = meteor(cand, ref);
  EXPECT_GE(s, 0.0);
  EXPECT_LE(s, 1.0);
}
