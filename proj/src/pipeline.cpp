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

#include "lion_forge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "lion_forge/digest.hpp"
#include "lion_forge/error.hpp"
#include "lion_forge/random.hpp"
#include "lion_forge/refine.hpp"

namespace lion_forge::pipeline {

using nlohmann::json;
using corpus::Corpus;
using quality::MQCombo;

namespace {

// Relative path -> SHA-256 recorded in the manifest.
class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) {
    if (root_.empty()) throw ValidationError("an output directory is required");
    fs::create_directories(root_);
  }

  const fs::path& root() const { return root_; }

  void text(const std::string& rel, const std::string& body) {
    files_[rel] = write_file(root_ / rel, body);
  }
  void doc(const std::string& rel, const json& body) { text(rel, canonical_dump(body) + "\n"); }
  void corpus(const std::string& rel, const Corpus& c) {
    files_[rel] = corpus::save_corpus(c, root_ / rel);
  }
  void merge(const std::string& prefix, const std::map<std::string, std::string>& files) {
    for (const auto& [rel, sha] : files) files_[prefix + rel] = sha;
  }

  // manifest.json lists every file written so far.
  Outcome finish(const std::string& command, const json& config,
                 const std::map<std::string, std::string>& inputs, Outcome outcome = {}) {
    const auto config_text = canonical_dump(config);
    json manifest = {{"tool", kToolName},
                     {"version", kToolVersion},
                     {"kind", command},
                     {"config", config},
                     {"config_digest", sha256_hex(config_text)},
                     {"inputs", inputs},
                     {"files", files_}};
    auto all = files_;
    all["manifest.json"] = write_file(root_ / "manifest.json", canonical_dump(manifest) + "\n");
    outcome.files = std::move(all);
    return outcome;
  }

 private:
  fs::path root_;
  std::map<std::string, std::string> files_;
};

json provenance(const json& config, const std::map<std::string, std::string>& inputs) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"config_digest", sha256_hex(canonical_dump(config))},
          {"inputs", inputs}};
}

// Input files are keyed by basename so manifests do not depend on where the
// run happened.
void add_input(std::map<std::string, std::string>& inputs, const std::string& key,
               const fs::path& path) {
  std::string k = key;
  for (int n = 2; inputs.count(k) != 0; ++n) k = key + "#" + std::to_string(n);
  inputs[k] = file_sha256(path);
}

std::string fmt_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void require_workers(int workers) {
  if (workers < 1) throw ValidationError("workers must be >= 1");
}

fs::path tensor_dir(const fs::path& p) {
  if (fs::exists(p / "tensor" / "manifest.json")) return p / "tensor";
  if (fs::exists(p / "manifest.json")) return p;
  throw ValidationError("no score tensor under " + p.string());
}

fs::path quality_file(const fs::path& p) {
  if (fs::is_directory(p)) return p / "quality_report.json";
  return p;
}

json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("missing file " + path.string());
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::map<std::string, std::string> assignment_map(const std::vector<std::string>& args,
                                                  const char* what) {
  std::map<std::string, std::string> out;
  for (const auto& a : args) {
    auto [k, v] = parse_assignment(a, what);
    out[k] = v;
  }
  return out;
}

double parse_double(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("bad ") + what + ": " + text);
  }
}

}  // namespace

DatasetArg parse_dataset_arg(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) {
    fs::path p(arg);
    return {p.stem().string(), p};
  }
  DatasetArg d{arg.substr(0, eq), fs::path(arg.substr(eq + 1))};
  if (d.id.empty() || d.path.empty()) throw ValidationError("bad dataset argument: " + arg);
  return d;
}

std::pair<std::string, std::string> parse_assignment(const std::string& arg, const char* what) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw ValidationError(std::string("expected KEY=VALUE for ") + what + ", got " + arg);
  }
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

cross_eval::Registry load_registry(const std::vector<std::string>& dataset_args,
                                   std::vector<std::string>* warnings) {
  cross_eval::Registry reg;
  for (const auto& a : dataset_args) {
    auto d = parse_dataset_arg(a);
    if (reg.count(d.id) != 0) throw ValidationError("dataset given twice: " + d.id);
    auto c = corpus::load_corpus(d.path, d.id);
    if (warnings != nullptr) {
      for (auto& w : c.validation_warnings()) warnings->push_back(std::move(w));
    }
    reg.emplace(d.id, std::move(c));
  }
  return reg;
}

// ---------------------------------------------------------------- prepare

Outcome prepare(const PrepareConfig& config) {
  if (config.datasets.empty()) throw ValidationError("prepare needs at least one dataset");
  if (config.seeds.empty()) throw ValidationError("prepare needs at least one seed");
  for (auto seed : config.seeds) {
    corpus::SplitSpec{config.train_fraction, config.eval_n, seed}.validate();
  }

  Outcome outcome;
  std::map<std::string, std::string> inputs;
  for (const auto& a : config.datasets) {
    auto d = parse_dataset_arg(a);
    add_input(inputs, "dataset:" + d.id, d.path);
  }
  auto reg = load_registry(config.datasets, &outcome.warnings);

  json dedup_log = json::object();
  for (const auto& rule : config.dedup) {
    auto [target, source] = parse_assignment(rule, "--dedup");
    if (reg.count(target) == 0 || reg.count(source) == 0) {
      throw ValidationError("dedup rule names an unknown dataset: " + rule);
    }
    std::size_t removed = 0;
    reg[target] = corpus::remove_overlap(reg.at(target), reg.at(source), &removed);
    dedup_log[target + "=" + source] = removed;
    outcome.messages.push_back("dedup " + rule + ": removed " + std::to_string(removed));
  }

  OutputDir out(config.out);
  for (const auto& [id, c] : reg) out.corpus("datasets/" + id + ".jsonl", c);

  for (auto seed : config.seeds) {
    const corpus::SplitSpec spec{config.train_fraction, config.eval_n, seed};
    const std::string dir = "split_" + std::to_string(seed) + "/";
    std::map<std::string, Corpus> holdouts;
    for (const auto& [id, c] : reg) {
      auto split = corpus::split_corpus(c, spec);
      out.corpus(dir + id + ".tune.jsonl", split.tune);
      out.corpus(dir + id + ".holdout.jsonl", split.holdout);
      out.doc(dir + id + ".split.json", split.manifest);
      holdouts.emplace(id, std::move(split.holdout));
    }
    if (config.eval600) out.corpus(dir + "eval600.jsonl", corpus::build_eval600(holdouts, spec));
  }

  json cfg = {{"seeds", config.seeds},
              {"train_fraction", config.train_fraction},
              {"eval_n", config.eval_n},
              {"eval600", config.eval600},
              {"dedup", dedup_log}};
  return out.finish("prepare", cfg, inputs, std::move(outcome));
}

// ---------------------------------------------------------- mock-generate

MockMode parse_mock_mode(const std::string& name) {
  if (name == "echo") return MockMode::kEcho;
  if (name == "dropout") return MockMode::kDropout;
  if (name == "gibberish") return MockMode::kGibberish;
  throw ValidationError("unknown mock mode: " + name + " (echo, dropout, gibberish)");
}

std::string mock_output(const std::string& answer, MockMode mode, double rate,
                        std::uint64_t seed) {
  if (mode == MockMode::kEcho) return answer;
  Rng rng(seed);
  auto words = split_words(answer);
  if (mode == MockMode::kDropout) {
    std::vector<std::string> kept;
    for (auto& w : words) {
      if (rng.uniform() >= rate) kept.push_back(std::move(w));
    }
    return join_words(kept);
  }
  // Letters plus digits: never a dictionary word, so nothing matches.
  static constexpr char kLetters[] = "bcdfghjklmnpqrstvwxz";
  std::vector<std::string> out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string w;
    for (int j = 0; j < 3; ++j) w += kLetters[rng.below(sizeof kLetters - 1)];
    for (int j = 0; j < 2; ++j) w += static_cast<char>('0' + rng.below(10));
    out.push_back(std::move(w));
  }
  return join_words(out);
}

Outcome mock_generate(const MockConfig& config) {
  if (!(config.rate >= 0.0 && config.rate <= 1.0)) throw ValidationError("rate must be in [0,1]");
  std::map<std::string, std::string> inputs;
  for (const auto& a : config.datasets) {
    auto d = parse_dataset_arg(a);
    add_input(inputs, "dataset:" + d.id, d.path);
  }
  Outcome outcome;
  auto reg = load_registry(config.datasets, &outcome.warnings);
  std::vector<std::string> ids;
  for (const auto& [id, c] : reg) ids.push_back(id);
  if (config.eval600) {
    add_input(inputs, "eval600", *config.eval600);
    reg[std::string(corpus::kEval600Id)] =
        corpus::load_corpus(*config.eval600, std::string(corpus::kEval600Id));
  }
  const auto plan = cross_eval::plan_runs(ids, config.eval600.has_value());

  std::map<std::string, MockMode> modes;
  for (const auto& [t, m] : assignment_map(config.tuner_modes, "--tuner-mode")) {
    modes[t] = parse_mock_mode(m);
  }
  std::map<std::string, double> rates;
  for (const auto& [t, r] : assignment_map(config.tuner_rates, "--tuner-rate")) {
    const double v = parse_double(r, "rate");
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("rate must be in [0,1]: " + t);
    rates[t] = v;
  }
  auto known = [&](const std::string& t) {
    if (std::find(ids.begin(), ids.end(), t) == ids.end()) throw ValidationError("unknown tuner " + t);
  };
  for (const auto& [t, _] : modes) known(t);
  for (const auto& [t, _] : rates) known(t);

  std::string body;
  for (const auto& pair : plan.pairs) {
    const auto mode = modes.count(pair.tune) ? modes.at(pair.tune) : config.mode;
    const double rate = rates.count(pair.tune) ? rates.at(pair.tune) : config.rate;
    std::vector<const corpus::Sample*> samples;
    for (const auto& s : reg.at(pair.eval).samples()) samples.push_back(&s);
    std::sort(samples.begin(), samples.end(),
              [](const auto* a, const auto* b) { return a->id < b->id; });
    for (const auto* s : samples) {
      const auto seed = derive_seed(config.seed, "mock:" + pair.tune + "|" + pair.eval + "|" + s->id);
      json rec = {{"tune_dataset", pair.tune},
                  {"eval_dataset", pair.eval},
                  {"id", s->id},
                  {"output", mock_output(s->answer, mode, rate, seed)}};
      body += canonical_dump(rec) + "\n";
    }
  }

  OutputDir out(config.out);
  out.text("predictions.jsonl", body);
  json mode_cfg = json::object();
  for (const auto& [t, m] : modes) {
    mode_cfg[t] = m == MockMode::kEcho ? "echo" : m == MockMode::kDropout ? "dropout" : "gibberish";
  }
  json cfg = {{"mode", config.mode == MockMode::kEcho      ? "echo"
                       : config.mode == MockMode::kDropout ? "dropout"
                                                           : "gibberish"},
              {"rate", config.rate},
              {"tuner_modes", mode_cfg},
              {"tuner_rates", rates},
              {"seed", config.seed}};
  outcome.messages.push_back("wrote " + std::to_string(plan.pairs.size()) + " pairs");
  return out.finish("mock-generate", cfg, inputs, std::move(outcome));
}

// ------------------------------------------------------------------ score

Outcome score(const ScoreConfig& config) {
  const auto combo = MQCombo::parse(config.combo);
  require_workers(config.workers);
  if (config.predictions.empty()) throw ValidationError("score needs at least one predictions file");

  std::map<std::string, std::string> inputs;
  for (const auto& a : config.datasets) {
    auto d = parse_dataset_arg(a);
    add_input(inputs, "dataset:" + d.id, d.path);
  }
  for (const auto& p : config.predictions) add_input(inputs, "predictions:" + p.filename().string(), p);

  Outcome outcome;
  auto reg = load_registry(config.datasets, &outcome.warnings);
  std::vector<std::string> ids;
  for (const auto& [id, c] : reg) ids.push_back(id);
  if (config.eval600) {
    add_input(inputs, "eval600", *config.eval600);
    reg[std::string(corpus::kEval600Id)] =
        corpus::load_corpus(*config.eval600, std::string(corpus::kEval600Id));
  }
  const auto plan = cross_eval::plan_runs(ids, config.eval600.has_value());
  const auto store = cross_eval::ingest_predictions(config.predictions, plan, reg, !config.allow_missing);

  const cross_eval::ScoreOptions opts{config.workers, config.cider, config.allow_missing};
  const auto tensor = cross_eval::build_tensor(plan, store, reg, combo, opts);

  json cfg = {{"combo", combo.name()},
              {"cider", config.cider},
              {"allow_missing", config.allow_missing},
              {"eval600", config.eval600.has_value()}};

  OutputDir out(config.out);
  out.merge("tensor/", cross_eval::write_tensor(tensor, out.root() / "tensor", provenance(cfg, inputs)));
  out.text("mqd_matrix.csv", cross_eval::mqd_matrix_csv(tensor, combo));
  out.text("radar.csv", cross_eval::radar_csv(tensor, combo));

  json pairs = json::array();
  for (const auto& p : tensor.pairs()) {
    json row = {{"tune", p.pair.tune},
                {"eval", p.pair.eval},
                {"mq_d", p.mq_d},
                {"samples", p.scores.size()},
                {"empty_outputs", p.empty_outputs},
                {"missing", p.missing}};
    if (p.mean_cider) row["cider"] = *p.mean_cider;
    pairs.push_back(std::move(row));
  }
  out.doc("score_report.json", {{"combo", combo.name()},
                                {"datasets", tensor.datasets()},
                                {"pairs", pairs},
                                {"missing_cells", tensor.missing_cells()},
                                {"empty_outputs", tensor.empty_outputs()}});

  if (tensor.missing_cells() > 0) {
    outcome.warnings.push_back(std::to_string(tensor.missing_cells()) +
                               " missing predictions scored as 0");
  }
  if (tensor.empty_outputs() > 0) {
    outcome.warnings.push_back(std::to_string(tensor.empty_outputs()) + " empty outputs scored as 0");
  }
  return out.finish("score", cfg, inputs, std::move(outcome));
}

// ---------------------------------------------------------------- quality

namespace {

struct SqRow {
  std::string id;
  double sq;
};

// Per dataset: SQ descending, ties by ascending id.
std::vector<SqRow> sorted_sq(const std::map<std::string, double>& scores) {
  std::vector<SqRow> rows;
  for (const auto& [id, v] : scores) rows.push_back({id, v});
  std::stable_sort(rows.begin(), rows.end(), [](const SqRow& a, const SqRow& b) {
    if (a.sq != b.sq) return a.sq > b.sq;
    return a.id < b.id;
  });
  return rows;
}

}  // namespace

Outcome quality(const QualityConfig& config) {
  std::optional<MQCombo> combo;
  if (config.combo) combo = MQCombo::parse(*config.combo);
  const auto dir = tensor_dir(config.tensor);
  const auto tensor = cross_eval::read_tensor(dir);
  if (!combo) combo = MQCombo::parse(tensor.combo());

  std::map<std::string, std::string> inputs;
  add_input(inputs, "tensor", dir / "manifest.json");
  json cfg = {{"combo", combo->name()}};

  auto report = cross_eval::quality_report(tensor, *combo);
  report.provenance = provenance(cfg, inputs);
  report.check_invariants();

  OutputDir out(config.out);
  out.doc("quality_report.json", report.to_json());

  std::vector<double> dq_values;
  for (const auto& [_, v] : report.dq) dq_values.push_back(v);
  const auto ranks = quality::competition_ranks(dq_values);
  std::string table = "dataset,dq,rank\n";
  std::size_t i = 0;
  for (const auto& [ds, v] : report.dq) {
    table += csv_field(ds) + "," + format_fixed(v) + "," + std::to_string(ranks[i++]) + "\n";
  }
  out.text("dq_table.csv", table);

  std::string lines;
  for (const auto& [ds, scores] : report.sq) {
    std::size_t rank = 0;
    for (const auto& row : sorted_sq(scores)) {
      lines += canonical_dump({{"dataset", ds}, {"id", row.id}, {"rank", ++rank}, {"sq", row.sq}}) + "\n";
    }
  }
  out.text("sq.jsonl", lines);
  return out.finish("quality", cfg, inputs);
}

// -------------------------------------------------------------- ablate-mq

Outcome ablate_mq(const AblateConfig& config) {
  std::vector<MQCombo> combos;
  for (const auto& c : config.combos) combos.push_back(MQCombo::parse(c));
  if (combos.empty()) throw ValidationError("ablate-mq needs at least one combo");
  const auto dir = tensor_dir(config.tensor);
  const auto tensor = cross_eval::read_tensor(dir);

  std::map<std::string, std::string> inputs;
  add_input(inputs, "tensor", dir / "manifest.json");

  std::string csv = "combo,dataset,dq,dq_rank,eval600_mq,eval600_rank\n";
  json result = json::object();
  Outcome outcome;
  for (const auto& combo : combos) {
    const auto dq = quality::dataset_quality(tensor.matrix(combo));
    const auto e600 = tensor.eval600_mq(combo);
    if (e600.empty()) {
      throw IncompleteError("tensor has no eval600 pairs; score with --eval600 to ablate");
    }
    std::vector<double> x, y;
    for (const auto& ds : tensor.datasets()) {
      x.push_back(dq.at(ds));
      y.push_back(e600.at(ds));
    }
    const auto rx = quality::competition_ranks(x);
    const auto ry = quality::competition_ranks(y);
    const double agreement = quality::rank_agreement(x, y);
    json per = json::object();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto& ds = tensor.datasets()[i];
      csv += combo.name() + "," + csv_field(ds) + "," + format_fixed(x[i]) + "," +
             std::to_string(rx[i]) + "," + format_fixed(y[i]) + "," + std::to_string(ry[i]) + "\n";
      per[ds] = {{"dq", x[i]}, {"dq_rank", rx[i]}, {"eval600_mq", y[i]}, {"eval600_rank", ry[i]}};
    }
    result[combo.name()] = {{"datasets", per}, {"rank_agreement", agreement}};
    outcome.messages.push_back(combo.name() + " rank agreement " + format_fixed(agreement, 4));
  }

  json names = json::array();
  for (const auto& c : combos) names.push_back(c.name());
  json cfg = {{"combos", names}};
  OutputDir out(config.out);
  out.text("ablation.csv", csv);
  out.doc("ablation.json", {{"combos", result}, {"provenance", provenance(cfg, inputs)}});
  return out.finish("ablate-mq", cfg, inputs, std::move(outcome));
}

// ----------------------------------------------------------------- refine

namespace {

std::map<std::string, Corpus> corpora_for(const std::vector<std::string>& args,
                                          std::map<std::string, std::string>& inputs,
                                          std::vector<std::string>* warnings) {
  for (const auto& a : args) {
    auto d = parse_dataset_arg(a);
    add_input(inputs, "dataset:" + d.id, d.path);
  }
  auto reg = load_registry(args, warnings);
  return {reg.begin(), reg.end()};
}

}  // namespace

Outcome refine(const RefineCmdConfig& config) {
  const auto strategy = refine::parse_strategy(config.strategy);
  std::vector<refine::RefineConfig> runs;
  if (strategy == refine::Strategy::kS3) {
    if (config.lambdas.empty()) throw ValidationError("S3 needs at least one lambda");
    for (double l : config.lambdas) runs.push_back({strategy, std::nullopt, l, std::nullopt});
  } else {
    if (config.portions.empty()) throw ValidationError("S1/S2 need at least one portion");
    for (double p : config.portions) {
      std::optional<std::uint64_t> seed;
      if (strategy == refine::Strategy::kS2) seed = config.seed;
      runs.push_back({strategy, p, std::nullopt, seed});
    }
  }
  for (const auto& r : runs) r.validate();

  std::map<std::string, std::string> inputs;
  const auto qpath = quality_file(config.quality);
  add_input(inputs, "quality_report", qpath);
  const auto report = quality::QualityReport::from_json(read_json(qpath));

  Outcome outcome;
  const auto corpora = corpora_for(config.datasets, inputs, &outcome.warnings);
  if (corpora.empty()) throw ValidationError("refine needs the scored datasets");

  OutputDir out(config.out);
  json files = json::array();
  for (const auto& run : runs) {
    const auto selections = refine::refine_all(corpora, report.sq, run);
    json sel = json::array();
    json counts = json::object();
    for (const auto& s : selections) {
      sel.push_back(s.to_json());
      counts[s.dataset] = s.ids.size();
    }
    const double value = strategy == refine::Strategy::kS3 ? *run.lambda : *run.portion;
    const std::string name = refine::strategy_name(strategy) +
                             (strategy == refine::Strategy::kS3 ? "_lambda" : "_P") +
                             fmt_param(value) + ".json";
    out.doc(name, {{"strategy", refine::strategy_name(strategy)},
                   {"params", run.params()},
                   {"counts", counts},
                   {"selections", sel},
                   {"provenance", provenance(run.params(), inputs)}});
    files.push_back(name);
    std::string line = name + ":";
    for (const auto& [ds, n] : counts.items()) line += " " + ds + "=" + n.dump();
    outcome.messages.push_back(line);
  }

  json values = json::array();
  if (strategy == refine::Strategy::kS3) {
    for (double l : config.lambdas) values.push_back(l);
  } else {
    for (double p : config.portions) values.push_back(p);
  }
  json cfg = {{"strategy", refine::strategy_name(strategy)}, {"values", values}};
  if (strategy == refine::Strategy::kS2) cfg["seed"] = config.seed;
  return out.finish("refine", cfg, inputs, std::move(outcome));
}

// --------------------------------------------------------------- assemble

Outcome assemble(const AssembleConfig& config) {
  std::map<std::string, std::string> inputs;
  add_input(inputs, "selection", config.selection);
  const auto doc = read_json(config.selection);
  if (!doc.contains("selections") || !doc.at("selections").is_array()) {
    throw ValidationError(config.selection.string() + " is not a refine selection file");
  }
  std::vector<refine::Selection> selections;
  for (const auto& s : doc.at("selections")) selections.push_back(refine::Selection::from_json(s));

  Outcome outcome;
  const auto corpora = corpora_for(config.datasets, inputs, &outcome.warnings);
  auto a = refine::assemble_revo_lion(selections, corpora, config.eval_n, config.seed, config.name);

  OutputDir out(config.out);
  out.corpus(config.name + "_tune.jsonl", a.tune);
  out.corpus(config.name + "_eval.jsonl", a.eval);
  out.doc("assembly.json", a.manifest);
  json cfg = {{"eval_n", config.eval_n}, {"seed", config.seed}, {"name", config.name}};
  outcome.messages.push_back("tune " + std::to_string(a.tune.size()) + ", eval " +
                             std::to_string(a.eval.size()));
  return out.finish("assemble", cfg, inputs, std::move(outcome));
}

// --------------------------------------------------------------- sq-cases

Outcome sq_cases(const SqCasesConfig& config) {
  std::map<std::string, std::string> inputs;
  const auto qpath = quality_file(config.quality);
  add_input(inputs, "quality_report", qpath);
  const auto report = quality::QualityReport::from_json(read_json(qpath));
  const auto dir = tensor_dir(config.tensor);
  add_input(inputs, "tensor", dir / "manifest.json");
  const auto tensor = cross_eval::read_tensor(dir);

  Outcome outcome;
  const auto corpora = corpora_for(config.datasets, inputs, &outcome.warnings);

  std::string text;
  json cases = json::object();
  for (const auto& [ds, scores] : report.sq) {
    const auto rows = sorted_sq(scores);
    std::size_t k = config.k;
    if (2 * k > rows.size()) {
      k = rows.size() / 2;
      outcome.warnings.push_back(ds + ": k=" + std::to_string(config.k) + " clamped to " +
                                 std::to_string(k));
    }
    const Corpus* c = corpora.count(ds) ? &corpora.at(ds) : nullptr;
    auto render = [&](const SqRow& row, const char* side, std::size_t rank) {
      json entry = {{"id", row.id}, {"sq", row.sq}, {"rank", rank}, {"side", side}};
      text += "[" + ds + "] " + side + " #" + std::to_string(rank) + " id=" + row.id +
              " SQ=" + format_fixed(row.sq) + "\n";
      if (c != nullptr) {
        if (const auto* s = c->find(row.id)) {
          entry["instruction"] = s->instruction;
          entry["answer"] = s->answer;
          entry["image"] = s->image;
          text += "  image: " + s->image + "\n  instruction: " + s->instruction +
                  "\n  reference: " + s->answer + "\n";
        }
      }
      json tuners = json::object();
      for (const auto& t : tensor.datasets()) {
        if (t == ds) continue;
        const auto* p = tensor.find(t, ds);
        if (p == nullptr) continue;
        for (std::size_t i = 0; i < p->scores.size(); ++i) {
          if (p->scores[i].sample_id != row.id) continue;
          tuners[t] = {{"output", p->outputs[i]}, {"mq_s", p->scores[i].mq_s}};
          text += "  " + t + " (MQ^S " + format_fixed(p->scores[i].mq_s, 4) + "): " +
                  p->outputs[i] + "\n";
        }
      }
      entry["tuners"] = tuners;
      return entry;
    };
    json top = json::array(), bottom = json::array();
    for (std::size_t i = 0; i < k; ++i) top.push_back(render(rows[i], "top", i + 1));
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t pos = rows.size() - 1 - i;
      bottom.push_back(render(rows[pos], "bottom", pos + 1));
    }
    cases[ds] = {{"top", top}, {"bottom", bottom}};
  }

  json cfg = {{"k", config.k}};
  OutputDir out(config.out);
  out.text("sq_cases.txt", text);
  out.doc("sq_cases.json", cases);
  return out.finish("sq-cases", cfg, inputs, std::move(outcome));
}

// ------------------------------------------------------------- bench-eval

Outcome bench_eval(const BenchEvalConfig& config) {
  const auto combo = MQCombo::parse(config.combo);
  require_workers(config.workers);
  if (config.predictions.empty()) throw ValidationError("bench-eval needs predictions");
  const auto eval_arg = parse_dataset_arg(config.eval);

  std::map<std::string, std::string> inputs;
  add_input(inputs, "eval:" + eval_arg.id, eval_arg.path);
  for (const auto& p : config.predictions) add_input(inputs, "predictions:" + p.filename().string(), p);

  Outcome outcome;
  cross_eval::Registry reg = load_registry({config.eval}, &outcome.warnings);
  const auto& eval = reg.at(eval_arg.id);

  // Models are the tune_dataset values of records aimed at this eval set;
  // records for other eval sets are skipped.
  std::set<std::string> models;
  for (const auto& path : config.predictions) {
    std::istringstream in(read_file(path));
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto rec = json::parse(line);
        if (rec.at("eval_dataset").get<std::string>() == eval_arg.id) {
          models.insert(rec.at("tune_dataset").get<std::string>());
        }
      } catch (const json::exception& e) {
        throw LoadError(path.string(), line_no, e.what());
      }
    }
  }
  if (models.count(eval_arg.id) != 0) throw ValidationError("model name equals the eval set id");

  cross_eval::RunPlan plan;
  plan.datasets.assign(models.begin(), models.end());
  for (const auto& m : models) plan.pairs.push_back({m, eval_arg.id});
  if (models.empty()) throw ValidationError("no predictions target eval set " + eval_arg.id);
  const auto store =
      cross_eval::ingest_predictions(config.predictions, plan, reg, !config.allow_missing, true);

  // Subsets: the whole set plus one per source tag.
  std::map<std::string, std::string> source_of;
  std::set<std::string> subsets{"all"};
  for (const auto& s : eval.samples()) {
    if (s.source) {
      source_of[s.id] = *s.source;
      subsets.insert(*s.source);
    }
  }

  const cross_eval::ScoreOptions opts{config.workers, true, config.allow_missing};
  std::vector<cross_eval::PairResult> results(plan.pairs.size());
  for (std::size_t i = 0; i < plan.pairs.size(); ++i) {
    results[i] = cross_eval::score_pair(plan.pairs[i], store, reg, combo, opts);
  }

  std::string csv = "model,subset,samples,bleu1,bleu2,bleu3,bleu4,meteor,rouge_l,mq,cider,empty,missing\n";
  json doc = json::object();
  for (const auto& r : results) {
    json per = json::object();
    for (const auto& subset : subsets) {
      double b[4] = {0, 0, 0, 0}, m = 0, rl = 0, mq = 0, cider = 0;
      std::size_t n = 0, empty = 0, missing = 0;
      for (const auto& s : r.scores) {  // ascending id
        if (subset != "all") {
          auto it = source_of.find(s.sample_id);
          if (it == source_of.end() || it->second != subset) continue;
        }
        ++n;
        b[0] += s.metrics.b1;
        b[1] += s.metrics.b2;
        b[2] += s.metrics.b3;
        b[3] += s.metrics.b4;
        m += s.metrics.meteor;
        rl += s.metrics.rouge_l;
        mq += s.mq_s;
        cider += s.metrics.cider.value_or(0.0);
        empty += s.empty_output ? 1 : 0;
        missing += s.missing ? 1 : 0;
      }
      if (n == 0) continue;
      const double dn = static_cast<double>(n);
      json row = {{"samples", n},   {"bleu1", b[0] / dn},  {"bleu2", b[1] / dn},
                  {"bleu3", b[2] / dn}, {"bleu4", b[3] / dn}, {"meteor", m / dn},
                  {"rouge_l", rl / dn}, {"mq", mq / dn},     {"cider", cider / dn},
                  {"empty", empty}, {"missing", missing}};
      csv += csv_field(r.pair.tune) + "," + csv_field(subset) + "," + std::to_string(n);
      for (const char* key : {"bleu1", "bleu2", "bleu3", "bleu4", "meteor", "rouge_l", "mq", "cider"}) {
        csv += "," + format_fixed(row.at(key).get<double>());
      }
      csv += "," + std::to_string(empty) + "," + std::to_string(missing) + "\n";
      per[subset] = std::move(row);
    }
    doc[r.pair.tune] = std::move(per);
  }

  json cfg = {{"combo", combo.name()}, {"eval", eval_arg.id}, {"allow_missing", config.allow_missing}};
  OutputDir out(config.out);
  out.text("bench.csv", csv);
  out.doc("bench.json", {{"models", doc}, {"provenance", provenance(cfg, inputs)}});
  return out.finish("bench-eval", cfg, inputs, std::move(outcome));
}

// ----------------------------------------------------------------- verify

std::vector<std::string> verify(const fs::path& root, std::size_t* manifests_checked) {
  if (!fs::exists(root)) throw ValidationError("no such directory " + root.string());
  std::vector<fs::path> manifests;
  if (fs::is_regular_file(root)) {
    manifests.push_back(root);
  } else {
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file() && e.path().filename() == "manifest.json") manifests.push_back(e.path());
    }
  }
  std::sort(manifests.begin(), manifests.end());
  std::vector<std::string> problems;
  for (const auto& m : manifests) {
    json doc;
    try {
      doc = json::parse(read_file(m));
    } catch (const json::parse_error&) {
      problems.push_back(m.string() + ": malformed manifest");
      continue;
    }
    if (!doc.contains("files") || !doc.at("files").is_object()) {
      problems.push_back(m.string() + ": no file list");
      continue;
    }
    if (doc.value("version", "") != kToolVersion) {
      problems.push_back(m.string() + ": written by version " + doc.value("version", "?"));
    }
    for (const auto& [rel, sha] : doc.at("files").items()) {
      if (rel == "manifest.json") continue;
      const auto path = m.parent_path() / rel;
      if (!fs::exists(path)) {
        problems.push_back(path.string() + ": missing");
      } else if (file_sha256(path) != sha.get<std::string>()) {
        problems.push_back(path.string() + ": digest mismatch");
      }
    }
  }
  if (manifests_checked != nullptr) *manifests_checked = manifests.size();
  return problems;
}

}  // namespace lion_forge::pipeline
