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

#include "lion_forge/cross_eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "lion_forge/digest.hpp"
#include "lion_forge/error.hpp"

namespace lion_forge::cross_eval {

using nlohmann::json;

namespace {

std::string cell_name(const PredictionStore::Key& k) {
  return "(" + std::get<0>(k) + "," + std::get<1>(k) + "," + std::get<2>(k) + ")";
}

// Eval corpus samples in ascending id order.
std::vector<const corpus::Sample*> sorted_samples(const Corpus& c) {
  std::vector<const corpus::Sample*> out;
  out.reserve(c.size());
  for (const auto& s : c.samples()) out.push_back(&s);
  std::sort(out.begin(), out.end(),
            [](const corpus::Sample* a, const corpus::Sample* b) { return a->id < b->id; });
  return out;
}

const Corpus& corpus_for(const Registry& corpora, const std::string& id) {
  auto it = corpora.find(id);
  if (it == corpora.end()) throw ValidationError("no corpus registered for dataset " + id);
  return it->second;
}

std::string file_safe(const std::string& id) {
  std::string out = id;
  for (auto& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

std::string pair_file_name(const RunPair& p) {
  return "pair__" + file_safe(p.tune) + "__" + file_safe(p.eval) + ".json";
}

}  // namespace

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const auto i = next.fetch_add(1);
          if (i >= n) return;
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next.store(n);
            return;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

bool RunPlan::contains(const std::string& tune, const std::string& eval) const {
  return std::find(pairs.begin(), pairs.end(), RunPair{tune, eval}) != pairs.end();
}

std::size_t RunPlan::cross_pair_count() const {
  return datasets.size() * (datasets.size() - 1);
}

RunPlan plan_runs(std::vector<std::string> registry, bool include_eval600) {
  std::sort(registry.begin(), registry.end());
  registry.erase(std::unique(registry.begin(), registry.end()), registry.end());
  if (registry.size() < 2) throw InvalidArgument("plan_runs: need at least 2 datasets");
  if (std::find(registry.begin(), registry.end(), corpus::kEval600Id) != registry.end()) {
    throw InvalidArgument("plan_runs: '" + std::string(corpus::kEval600Id) +
                          "' is reserved for the balanced evaluation set");
  }
  RunPlan plan;
  plan.datasets = registry;
  plan.include_eval600 = include_eval600;
  for (const auto& t : registry) {
    for (const auto& e : registry) {
      if (t != e) plan.pairs.push_back({t, e});
    }
  }
  if (include_eval600) {
    for (const auto& t : registry) plan.pairs.push_back({t, std::string(corpus::kEval600Id)});
  }
  return plan;
}

const std::string* PredictionStore::find(const std::string& tune, const std::string& eval,
                                         const std::string& id) const {
  auto it = outputs_.find({tune, eval, id});
  return it == outputs_.end() ? nullptr : &it->second;
}

PredictionStore ingest_predictions(const std::vector<std::filesystem::path>& paths,
                                   const RunPlan& plan, const Registry& corpora, bool strict,
                                   bool skip_unplanned) {
  const std::set<RunPair> planned(plan.pairs.begin(), plan.pairs.end());
  PredictionStore store;
  for (const auto& path : paths) {
    const std::string text = read_file(path);
    const std::string origin = path.string();
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      std::string_view line(text.data() + pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::parse_error& e) {
        throw LoadError(origin, line_no, std::string("malformed JSON: ") + e.what());
      }
      auto field = [&](const char* key) {
        if (!rec.is_object() || !rec.contains(key) || !rec[key].is_string()) {
          throw LoadError(origin, line_no, std::string("missing string key '") + key + "'");
        }
        return rec[key].get<std::string>();
      };
      const auto tune = field("tune_dataset");
      const auto eval = field("eval_dataset");
      const auto id = field("id");
      const auto output = field("output");
      if (!planned.contains(RunPair{tune, eval})) {
        if (skip_unplanned) continue;
        throw LoadError(origin, line_no, "pair (" + tune + "," + eval + ") is not in the run plan");
      }
      if (corpus_for(corpora, eval).find(id) == nullptr) {
        throw LoadError(origin, line_no, "unknown sample id '" + id + "' for dataset " + eval);
      }
      PredictionStore::Key key{tune, eval, id};
      const std::string here = origin + ":" + std::to_string(line_no);
      if (auto it = store.origin_.find(key); it != store.origin_.end()) {
        throw LoadError(origin, line_no,
                        "duplicate prediction " + cell_name(key) + " (first at " + it->second + ")");
      }
      store.origin_.emplace(key, here);
      store.outputs_.emplace(std::move(key), output);
    }
  }
  for (const auto& pair : plan.pairs) {
    for (const auto* s : sorted_samples(corpus_for(corpora, pair.eval))) {
      PredictionStore::Key key{pair.tune, pair.eval, s->id};
      if (!store.outputs_.contains(key)) {
        if (strict) throw IncompleteError("missing prediction for " + cell_name(key));
        store.missing_.push_back(std::move(key));
      }
    }
  }
  return store;
}

namespace {

struct EvalCache {
  std::vector<const corpus::Sample*> samples;
  std::vector<metrics::TokenSeq> refs;
  std::optional<metrics::IdfTable> idf;
};

EvalCache make_eval_cache(const Corpus& c, bool with_cider) {
  EvalCache cache;
  cache.samples = sorted_samples(c);
  cache.refs.reserve(cache.samples.size());
  for (const auto* s : cache.samples) cache.refs.push_back(metrics::tokenize(s->answer));
  if (with_cider && !cache.refs.empty()) cache.idf = metrics::cider_idf(cache.refs);
  return cache;
}

void score_cell(const RunPair& pair, const EvalCache& cache, std::size_t k,
                const PredictionStore& store, const MQCombo& combo, const ScoreOptions& options,
                PairResult& result) {
  const auto* sample = cache.samples[k];
  auto& ps = result.scores[k];
  ps.tune_dataset = pair.tune;
  ps.eval_dataset = pair.eval;
  ps.sample_id = sample->id;
  const std::string* output = store.find(pair.tune, pair.eval, sample->id);
  if (output == nullptr) {
    if (!options.allow_missing) {
      throw IncompleteError("missing prediction for (" + pair.tune + "," + pair.eval + "," +
                            sample->id + ")");
    }
    ps.missing = true;
    if (cache.idf) ps.metrics.cider = 0.0;
    ps.mq_s = 0.0;
    return;
  }
  result.outputs[k] = *output;
  const auto cand = metrics::tokenize(*output);
  ps.empty_output = cand.empty();
  const std::span<const metrics::TokenSeq> refs(&cache.refs[k], 1);
  ps.metrics = metrics::score_sample(cand, refs, cache.idf ? &*cache.idf : nullptr);
  ps.mq_s = quality::meta_quality(ps.metrics, combo);
}

void finish_pair(PairResult& r, bool with_cider) {
  r.empty_outputs = 0;
  r.missing = 0;
  double cider_sum = 0.0;
  for (const auto& s : r.scores) {
    if (s.empty_output) ++r.empty_outputs;
    if (s.missing) ++r.missing;
    if (s.metrics.cider) cider_sum += *s.metrics.cider;
  }
  r.mq_d = r.scores.empty() ? 0.0 : quality::dataset_mq(r.scores);
  if (with_cider && !r.scores.empty()) {
    r.mean_cider = cider_sum / static_cast<double>(r.scores.size());
  }
}

std::vector<PairResult> score_pairs(const std::vector<RunPair>& pairs,
                                    const PredictionStore& store, const Registry& corpora,
                                    const MQCombo& combo, const ScoreOptions& options) {
  std::map<std::string, EvalCache> caches;
  for (const auto& p : pairs) {
    if (!caches.contains(p.eval)) {
      caches.emplace(p.eval, make_eval_cache(corpus_for(corpora, p.eval), options.with_cider));
    }
  }
  std::vector<PairResult> results(pairs.size());
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto n = caches.at(pairs[p].eval).samples.size();
    results[p].pair = pairs[p];
    results[p].scores.resize(n);
    results[p].outputs.resize(n);
    for (std::size_t k = 0; k < n; ++k) cells.emplace_back(p, k);
  }
  parallel_for(cells.size(), options.workers, [&](std::size_t c) {
    const auto [p, k] = cells[c];
    score_cell(pairs[p], caches.at(pairs[p].eval), k, store, combo, options, results[p]);
  });
  for (auto& r : results) finish_pair(r, options.with_cider);
  return results;
}

}  // namespace

PairResult score_pair(const RunPair& pair, const PredictionStore& store, const Registry& corpora,
                      const MQCombo& combo, const ScoreOptions& options) {
  return std::move(score_pairs({pair}, store, corpora, combo, options).front());
}

ScoreTensor::ScoreTensor(std::vector<std::string> datasets, std::string combo,
                         std::vector<PairResult> pairs)
    : datasets_(std::move(datasets)), combo_(std::move(combo)), pairs_(std::move(pairs)) {
  std::sort(datasets_.begin(), datasets_.end());
}

const PairResult* ScoreTensor::find(const std::string& tune, const std::string& eval) const {
  for (const auto& p : pairs_) {
    if (p.pair.tune == tune && p.pair.eval == eval) return &p;
  }
  return nullptr;
}

namespace {

double rescored_mq_d(const PairResult& r, const MQCombo& combo) {
  if (r.scores.empty()) return 0.0;
  std::vector<PairScore> rescored = r.scores;
  for (auto& s : rescored) s.mq_s = quality::meta_quality(s.metrics, combo);
  return quality::dataset_mq(rescored);
}

}  // namespace

quality::DQMatrix ScoreTensor::matrix(const MQCombo& combo) const {
  quality::DQMatrix m(datasets_);
  for (const auto& p : pairs_) {
    if (p.pair.eval == corpus::kEval600Id) continue;
    m.set(p.pair.tune, p.pair.eval, rescored_mq_d(p, combo));
  }
  return m;
}

quality::TunerScores ScoreTensor::tuner_scores(const std::string& eval,
                                               const MQCombo& combo) const {
  quality::TunerScores out;
  for (const auto& p : pairs_) {
    if (p.pair.eval != eval) continue;
    auto& per_sample = out[p.pair.tune];
    for (const auto& s : p.scores) per_sample.emplace(s.sample_id, quality::meta_quality(s.metrics, combo));
  }
  return out;
}

std::map<std::string, double> ScoreTensor::eval600_mq(const MQCombo& combo) const {
  std::map<std::string, double> out;
  for (const auto& p : pairs_) {
    if (p.pair.eval == corpus::kEval600Id) out[p.pair.tune] = rescored_mq_d(p, combo);
  }
  return out;
}

std::size_t ScoreTensor::missing_cells() const {
  std::size_t n = 0;
  for (const auto& p : pairs_) n += p.missing;
  return n;
}

std::size_t ScoreTensor::empty_outputs() const {
  std::size_t n = 0;
  for (const auto& p : pairs_) n += p.empty_outputs;
  return n;
}

ScoreTensor build_tensor(const RunPlan& plan, const PredictionStore& store,
                         const Registry& corpora, const MQCombo& combo,
                         const ScoreOptions& options) {
  return ScoreTensor(plan.datasets, combo.name(),
                     score_pairs(plan.pairs, store, corpora, combo, options));
}

quality::QualityReport quality_report(const ScoreTensor& tensor, const MQCombo& combo) {
  quality::QualityReport report;
  report.combo = combo.name();
  report.dq = quality::dataset_quality(tensor.matrix(combo));
  for (const auto& e : tensor.datasets()) {
    report.sq[e] = quality::dataset_sample_quality(report.dq, e, tensor.tuner_scores(e, combo));
  }
  report.check_invariants();
  return report;
}

json pair_to_json(const PairResult& r, const std::string& combo) {
  json samples = json::array();
  for (std::size_t k = 0; k < r.scores.size(); ++k) {
    const auto& s = r.scores[k];
    json row = {{"id", s.sample_id},
                {"output", r.outputs[k]},
                {"b1", s.metrics.b1},
                {"b2", s.metrics.b2},
                {"b3", s.metrics.b3},
                {"b4", s.metrics.b4},
                {"meteor", s.metrics.meteor},
                {"rouge_l", s.metrics.rouge_l},
                {"mq_s", s.mq_s},
                {"empty", s.empty_output},
                {"missing", s.missing}};
    if (s.metrics.cider) row["cider"] = *s.metrics.cider;
    samples.push_back(std::move(row));
  }
  json doc = {{"tune", r.pair.tune},
              {"eval", r.pair.eval},
              {"combo", combo},
              {"mq_d", r.mq_d},
              {"empty_outputs", r.empty_outputs},
              {"missing", r.missing},
              {"samples", std::move(samples)}};
  if (r.mean_cider) doc["mean_cider"] = *r.mean_cider;
  return doc;
}

PairResult pair_from_json(const json& doc) {
  PairResult r;
  try {
    r.pair = {doc.at("tune").get<std::string>(), doc.at("eval").get<std::string>()};
    r.mq_d = doc.at("mq_d").get<double>();
    r.empty_outputs = doc.at("empty_outputs").get<std::size_t>();
    r.missing = doc.at("missing").get<std::size_t>();
    if (doc.contains("mean_cider")) r.mean_cider = doc.at("mean_cider").get<double>();
    for (const auto& row : doc.at("samples")) {
      PairScore s;
      s.tune_dataset = r.pair.tune;
      s.eval_dataset = r.pair.eval;
      s.sample_id = row.at("id").get<std::string>();
      s.metrics.b1 = row.at("b1").get<double>();
      s.metrics.b2 = row.at("b2").get<double>();
      s.metrics.b3 = row.at("b3").get<double>();
      s.metrics.b4 = row.at("b4").get<double>();
      s.metrics.meteor = row.at("meteor").get<double>();
      s.metrics.rouge_l = row.at("rouge_l").get<double>();
      if (row.contains("cider")) s.metrics.cider = row.at("cider").get<double>();
      s.mq_s = row.at("mq_s").get<double>();
      s.empty_output = row.at("empty").get<bool>();
      s.missing = row.at("missing").get<bool>();
      r.outputs.push_back(row.at("output").get<std::string>());
      r.scores.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed pair score file: ") + e.what());
  }
  return r;
}

std::map<std::string, std::string> write_tensor(const ScoreTensor& tensor,
                                                const std::filesystem::path& dir,
                                                const json& provenance) {
  std::map<std::string, std::string> files;
  json pairs = json::array();
  for (const auto& p : tensor.pairs()) {
    const auto name = pair_file_name(p.pair);
    files[name] = write_file(dir / name, canonical_dump(pair_to_json(p, tensor.combo())) + "\n");
    pairs.push_back({{"tune", p.pair.tune}, {"eval", p.pair.eval}, {"file", name}});
  }
  json manifest = {{"tool", kToolName},
                   {"version", kToolVersion},
                   {"kind", "score_tensor"},
                   {"combo", tensor.combo()},
                   {"datasets", tensor.datasets()},
                   {"pairs", std::move(pairs)},
                   {"files", files},
                   {"provenance", provenance}};
  files["manifest.json"] = write_file(dir / "manifest.json", canonical_dump(manifest) + "\n");
  return files;
}

ScoreTensor read_tensor(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed tensor manifest " + manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("kind", "") != "score_tensor") {
    throw ValidationError(manifest_path.string() + " is not a score tensor manifest");
  }
  const auto files = manifest.at("files").get<std::map<std::string, std::string>>();
  std::vector<PairResult> pairs;
  for (const auto& entry : manifest.at("pairs")) {
    const auto name = entry.at("file").get<std::string>();
    const auto text = read_file(dir / name);
    auto it = files.find(name);
    if (it == files.end() || it->second != sha256_hex(text)) {
      throw ValidationError("digest mismatch for " + (dir / name).string());
    }
    pairs.push_back(pair_from_json(json::parse(text)));
  }
  return ScoreTensor(manifest.at("datasets").get<std::vector<std::string>>(),
                     manifest.at("combo").get<std::string>(), std::move(pairs));
}

std::string mqd_matrix_csv(const ScoreTensor& tensor, const MQCombo& combo) {
  const auto m = tensor.matrix(combo);
  std::string out = "tune";
  for (const auto& e : m.datasets()) out += "," + e;
  out += "\n";
  for (const auto& t : m.datasets()) {
    out += t;
    for (const auto& e : m.datasets()) {
      const auto v = m.get(t, e);
      out += "," + (v ? format_fixed(*v) : std::string());
    }
    out += "\n";
  }
  return out;
}

std::string radar_csv(const ScoreTensor& tensor, const MQCombo& combo) {
  const auto m = tensor.matrix(combo);
  const auto e600 = tensor.eval600_mq(combo);
  std::string out = "tune";
  for (const auto& e : m.datasets()) out += "," + e;
  if (!e600.empty()) out += "," + std::string(corpus::kEval600Id);
  out += "\n";
  for (const auto& t : m.datasets()) {
    out += t;
    for (const auto& e : m.datasets()) {
      out += ",";
      if (e != t) {
        if (auto v = m.get(t, e)) out += format_fixed(*v);
      }
    }
    if (!e600.empty()) {
      out += ",";
      if (auto it = e600.find(t); it != e600.end()) out += format_fixed(it->second);
    }
    out += "\n";
  }
  return out;
}

}  // namespace lion_forge::cross_eval
