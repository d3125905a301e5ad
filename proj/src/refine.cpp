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

#include "lion_forge/refine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lion_forge/digest.hpp"
#include "lion_forge/error.hpp"
#include "lion_forge/random.hpp"

namespace lion_forge::refine {

using nlohmann::json;

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kS1: return "S1";
    case Strategy::kS2: return "S2";
    case Strategy::kS3: return "S3";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "S1" || name == "s1") return Strategy::kS1;
  if (name == "S2" || name == "s2") return Strategy::kS2;
  if (name == "S3" || name == "s3") return Strategy::kS3;
  throw ValidationError("unknown refinement strategy '" + name + "' (expected S1, S2 or S3)");
}

void RefineConfig::validate() const {
  const bool wants_portion = strategy != Strategy::kS3;
  const bool wants_lambda = strategy == Strategy::kS3;
  const bool wants_seed = strategy == Strategy::kS2;
  const auto name = strategy_name(strategy);
  if (wants_portion != portion.has_value()) {
    throw ValidationError(name + (wants_portion ? " requires" : " does not take") + " a portion");
  }
  if (wants_lambda != lambda.has_value()) {
    throw ValidationError(name + (wants_lambda ? " requires" : " does not take") + " lambda");
  }
  if (wants_seed != seed.has_value()) {
    throw ValidationError(name + (wants_seed ? " requires" : " does not take") + " a seed");
  }
  if (portion && !(*portion > 0.0 && *portion <= 1.0)) {
    throw InvalidArgument("portion must be in (0,1]");
  }
  if (lambda && !(*lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
}

json RefineConfig::params() const {
  json p = json::object();
  if (portion) p["portion"] = *portion;
  if (lambda) {
    p["lambda"] = *lambda;
    p["sigma"] = "population";
  }
  if (seed) p["seed"] = *seed;
  return p;
}

json Selection::to_json() const {
  json doc = {{"dataset", dataset},
              {"strategy", strategy_name(strategy)},
              {"params", params},
              {"ids", ids},
              {"selected", ids.size()},
              {"total", total},
              {"corpus_digest", corpus_digest},
              {"digest", sha256_hex(json(ids).dump())}};
  if (threshold) doc["threshold"] = *threshold;
  if (interval) doc["interval"] = {interval->first, interval->second};
  return doc;
}

Selection Selection::from_json(const json& doc) {
  Selection s;
  try {
    s.dataset = doc.at("dataset").get<std::string>();
    s.strategy = parse_strategy(doc.at("strategy").get<std::string>());
    s.params = doc.at("params");
    s.ids = doc.at("ids").get<std::vector<std::string>>();
    s.total = doc.at("total").get<std::size_t>();
    s.corpus_digest = doc.value("corpus_digest", "");
    if (doc.contains("threshold")) s.threshold = doc.at("threshold").get<double>();
    if (doc.contains("interval")) {
      s.interval = {doc.at("interval").at(0).get<double>(), doc.at("interval").at(1).get<double>()};
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed selection manifest: ") + e.what());
  }
  if (doc.contains("digest") && doc.at("digest") != sha256_hex(json(s.ids).dump())) {
    throw ValidationError("selection digest mismatch for " + s.dataset);
  }
  return s;
}

std::size_t portion_count(double portion, std::size_t n) {
  if (!(portion > 0.0 && portion <= 1.0)) throw InvalidArgument("portion must be in (0,1]");
  const double exact = portion * static_cast<double>(n);
  const auto c = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  return std::min(c, n);
}

namespace {

std::vector<double> scores_in_corpus_order(const Corpus& corpus, const SampleScores& sq) {
  std::vector<double> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.samples()) {
    auto it = sq.find(s.id);
    if (it == sq.end()) {
      throw IncompleteError("no SQ for sample " + s.id + " of " + corpus.dataset_id());
    }
    out.push_back(it->second);
  }
  return out;
}

Selection base_selection(const Corpus& corpus, Strategy strategy) {
  Selection sel;
  sel.dataset = corpus.dataset_id();
  sel.strategy = strategy;
  sel.total = corpus.size();
  sel.corpus_digest = corpus.digest();
  return sel;
}

void keep_marked(const Corpus& corpus, const std::vector<char>& keep, Selection& sel) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (keep[i]) sel.ids.push_back(corpus.samples()[i].id);
  }
}

}  // namespace

Selection refine_s1(const Corpus& corpus, const SampleScores& sq, double portion) {
  const auto count = portion_count(portion, corpus.size());
  const auto scores = scores_in_corpus_order(corpus, sq);
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return corpus.samples()[a].id < corpus.samples()[b].id;
  });
  Selection sel = base_selection(corpus, Strategy::kS1);
  sel.params = {{"portion", portion}};
  std::vector<char> keep(corpus.size(), 0);
  for (std::size_t r = 0; r < count; ++r) keep[order[r]] = 1;
  if (count > 0) sel.threshold = scores[order[count - 1]];
  keep_marked(corpus, keep, sel);
  return sel;
}

Selection refine_s2(const Corpus& corpus, std::size_t count, std::uint64_t seed) {
  if (count > corpus.size()) {
    throw InvalidArgument("refine_s2: count " + std::to_string(count) + " exceeds " +
                          std::to_string(corpus.size()) + " samples in " + corpus.dataset_id());
  }
  Selection sel = base_selection(corpus, Strategy::kS2);
  sel.params = {{"count", count}, {"seed", seed}};
  Rng rng(derive_seed(seed, "s2:" + corpus.dataset_id()));
  std::vector<char> keep(corpus.size(), 0);
  for (auto idx : rng.sample_indices(corpus.size(), count)) keep[idx] = 1;
  keep_marked(corpus, keep, sel);
  return sel;
}

Selection refine_s3(const Corpus& corpus, const SampleScores& sq, double lambda) {
  if (corpus.empty()) throw InvalidArgument("refine_s3: empty corpus " + corpus.dataset_id());
  if (!(lambda >= 0.0)) throw InvalidArgument("refine_s3: lambda must be >= 0");
  const auto scores = scores_in_corpus_order(corpus, sq);

  // Reduce in ascending sample id order.
  double mean, sigma;
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  if (*lo_it == *hi_it) {
    mean = *lo_it;
    sigma = 0.0;
  } else {
    std::vector<std::pair<std::string, double>> by_id;
    by_id.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) by_id.emplace_back(corpus.samples()[i].id, scores[i]);
    std::sort(by_id.begin(), by_id.end());
    double sum = 0.0;
    for (const auto& [id, v] : by_id) sum += v;
    mean = sum / static_cast<double>(by_id.size());
    double ss = 0.0;
    for (const auto& [id, v] : by_id) ss += (v - mean) * (v - mean);
    sigma = std::sqrt(ss / static_cast<double>(by_id.size()));
  }
  const double lo = mean - lambda * sigma;
  const double hi = mean + lambda * sigma;

  Selection sel = base_selection(corpus, Strategy::kS3);
  sel.params = {{"lambda", lambda}, {"sigma", "population"}, {"mean", mean}, {"std", sigma}};
  sel.interval = {lo, hi};
  std::vector<char> keep(corpus.size(), 0);
  for (std::size_t i = 0; i < scores.size(); ++i) keep[i] = scores[i] >= lo && scores[i] <= hi;
  keep_marked(corpus, keep, sel);
  return sel;
}

std::vector<Selection> refine_all(const std::map<std::string, Corpus>& corpora,
                                  const std::map<std::string, SampleScores>& sq,
                                  const RefineConfig& config) {
  config.validate();
  std::vector<Selection> out;
  for (const auto& [id, corpus] : corpora) {
    auto scores = [&]() -> const SampleScores& {
      auto it = sq.find(id);
      if (it == sq.end()) throw IncompleteError("no SQ scores for dataset " + id);
      return it->second;
    };
    switch (config.strategy) {
      case Strategy::kS1:
        out.push_back(refine_s1(corpus, scores(), *config.portion));
        break;
      case Strategy::kS2:
        out.push_back(refine_s2(corpus, portion_count(*config.portion, corpus.size()), *config.seed));
        out.back().params["portion"] = *config.portion;
        break;
      case Strategy::kS3:
        out.push_back(refine_s3(corpus, scores(), *config.lambda));
        break;
    }
  }
  return out;
}

Assembly assemble_revo_lion(const std::vector<Selection>& selections,
                            const std::map<std::string, Corpus>& corpora,
                            std::size_t eval_per_dataset, std::uint64_t seed,
                            const std::string& name) {
  std::vector<const Selection*> ordered;
  for (const auto& s : selections) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const Selection* a, const Selection* b) { return a->dataset < b->dataset; });

  std::vector<corpus::Sample> tune, eval;
  json per_dataset = json::object();
  json strategies = json::array();
  for (const auto* sel : ordered) {
    auto cit = corpora.find(sel->dataset);
    if (cit == corpora.end()) throw ValidationError("no corpus for selection of " + sel->dataset);
    const Corpus& corpus = cit->second;
    if (!sel->corpus_digest.empty() && sel->corpus_digest != corpus.digest()) {
      throw ValidationError("selection for " + sel->dataset + " was made on a different corpus");
    }
    if (sel->ids.size() < eval_per_dataset) {
      throw ValidationError("selection of " + sel->dataset + " has " +
                            std::to_string(sel->ids.size()) + " samples, fewer than eval_per_dataset=" +
                            std::to_string(eval_per_dataset));
    }
    Rng rng(derive_seed(seed, "assemble:" + sel->dataset));
    std::vector<char> to_eval(sel->ids.size(), 0);
    for (auto idx : rng.sample_indices(sel->ids.size(), eval_per_dataset)) to_eval[idx] = 1;
    for (std::size_t i = 0; i < sel->ids.size(); ++i) {
      const auto* s = corpus.find(sel->ids[i]);
      if (s == nullptr) throw ValidationError("selected id " + sel->ids[i] + " not in " + sel->dataset);
      corpus::Sample out = *s;
      out.id = corpus::tagged_id(sel->dataset, s->id);
      out.source = sel->dataset;
      (to_eval[i] ? eval : tune).push_back(std::move(out));
    }
    per_dataset[sel->dataset] = {{"selected", sel->ids.size()},
                                 {"eval", eval_per_dataset},
                                 {"tune", sel->ids.size() - eval_per_dataset},
                                 {"strategy", strategy_name(sel->strategy)},
                                 {"params", sel->params}};
  }
  Assembly a;
  a.tune = Corpus(name + "_tune", std::move(tune));
  a.eval = Corpus(name + "_eval", std::move(eval));
  a.manifest = {{"seed", seed},
                {"eval_per_dataset", eval_per_dataset},
                {"datasets", per_dataset},
                {"tune_size", a.tune.size()},
                {"eval_size", a.eval.size()},
                {"tune_digest", a.tune.digest()},
                {"eval_digest", a.eval.digest()}};
  return a;
}

}  // namespace lion_forge::refine
