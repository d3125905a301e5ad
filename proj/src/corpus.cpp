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

#include "lion_forge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "lion_forge/digest.hpp"
#include "lion_forge/error.hpp"
#include "lion_forge/random.hpp"
#include "lion_forge/text_metrics.hpp"

namespace lion_forge::corpus {

using nlohmann::json;

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string required_string(const json& rec, const char* key, const std::string& origin,
                            std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end()) throw LoadError(origin, line, std::string("missing key '") + key + "'");
  if (!it->is_string()) throw LoadError(origin, line, std::string("key '") + key + "' is not a string");
  return it->get<std::string>();
}

Sample sample_from_json(const json& rec, const std::string& origin, std::size_t line) {
  Sample s;
  s.id = required_string(rec, "id", origin, line);
  s.image = rec.contains("image") ? required_string(rec, "image", origin, line) : std::string();
  s.instruction = required_string(rec, "instruction", origin, line);
  s.answer = required_string(rec, "answer", origin, line);
  if (rec.contains("turn")) {
    if (!rec["turn"].is_number_integer()) throw LoadError(origin, line, "key 'turn' is not an integer");
    s.turn = rec["turn"].get<int>();
  }
  if (rec.contains("dataset")) s.source = required_string(rec, "dataset", origin, line);
  return s;
}

}  // namespace

Corpus::Corpus(std::string dataset_id, std::vector<Sample> samples)
    : dataset_id_(std::move(dataset_id)), samples_(std::move(samples)) {
  index_.reserve(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.id.empty()) throw ValidationError(dataset_id_ + ": empty sample id");
    if (blank(s.answer)) throw ValidationError(dataset_id_ + ": empty answer for " + s.id);
    if (!index_.emplace(s.id, i).second) {
      throw ValidationError(dataset_id_ + ": duplicate sample id " + s.id);
    }
  }
  digest_ = sha256_hex(serialize(*this));
}

const Sample* Corpus::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &samples_[it->second];
}

std::vector<std::string> Corpus::validation_warnings() const {
  std::vector<std::string> out;
  if (samples_.empty()) out.push_back(dataset_id_ + ": corpus is empty");
  return out;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must be in (0,1)");
  }
  if (eval_per_dataset < 1) throw InvalidArgument("eval_per_dataset must be >= 1");
}

json sample_to_json(const Sample& s) {
  json rec;
  rec["id"] = s.id;
  rec["image"] = s.image;
  rec["instruction"] = s.instruction;
  rec["answer"] = s.answer;
  if (s.turn) rec["turn"] = *s.turn;
  if (s.source) rec["dataset"] = *s.source;
  return rec;
}

std::string serialize(const Corpus& corpus) {
  std::string out;
  for (const auto& s : corpus.samples()) {
    out += canonical_dump(sample_to_json(s));
    out.push_back('\n');
  }
  return out;
}

std::string save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  return write_file(path, serialize(corpus));
}

std::vector<Sample> expand_conversation(const json& record) {
  const auto& turns = record.at("conversations");
  const std::string base = record.at("id").is_string() ? record.at("id").get<std::string>()
                                                       : record.at("id").dump();
  const std::string image = record.value("image", std::string());
  std::vector<Sample> out;
  std::string context;
  std::string pending_question;
  bool have_question = false;
  int turn = 0;
  for (const auto& t : turns) {
    const std::string from = t.at("from").get<std::string>();
    const std::string value = t.at("value").get<std::string>();
    if (from == "human" || from == "user") {
      pending_question = value;
      have_question = true;
    } else if (have_question) {
      ++turn;
      Sample s;
      s.id = base + "#" + std::to_string(turn);
      s.image = image;
      s.instruction = context + pending_question;
      s.answer = value;
      s.turn = turn;
      out.push_back(std::move(s));
      context += "USER: " + pending_question + "\nASSISTANT: " + value + "\n";
      have_question = false;
    }
  }
  return out;
}

Corpus parse_corpus(std::string_view text, std::string dataset_id, const std::string& origin) {
  std::vector<Sample> samples;
  std::unordered_map<std::string, std::size_t> first_line;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (blank(line)) continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LoadError(origin, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!rec.is_object()) throw LoadError(origin, line_no, "record is not a JSON object");

    std::vector<Sample> produced;
    if (rec.contains("conversations")) {
      try {
        produced = expand_conversation(rec);
      } catch (const json::exception& e) {
        throw LoadError(origin, line_no, std::string("malformed conversation: ") + e.what());
      }
    } else {
      produced.push_back(sample_from_json(rec, origin, line_no));
    }
    for (auto& s : produced) {
      if (s.id.empty()) throw LoadError(origin, line_no, "empty sample id");
      if (blank(s.answer)) throw LoadError(origin, line_no, "empty answer for sample " + s.id);
      auto [it, inserted] = first_line.emplace(s.id, line_no);
      if (!inserted) {
        throw LoadError(origin, line_no,
                        "duplicate sample id '" + s.id + "' (first seen on line " +
                            std::to_string(it->second) + ")");
      }
      samples.push_back(std::move(s));
    }
  }
  return Corpus(std::move(dataset_id), std::move(samples));
}

Corpus load_corpus(const std::filesystem::path& path, std::string dataset_id) {
  if (!std::filesystem::exists(path)) throw ValidationError("dataset file not found: " + path.string());
  if (dataset_id.empty()) dataset_id = path.stem().string();
  return parse_corpus(read_file(path), std::move(dataset_id), path.string());
}

std::string normalize_image_ref(std::string_view image) {
  std::string s(image);
  std::replace(s.begin(), s.end(), '\\', '/');
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (auto slash = s.find_last_of('/'); slash != std::string::npos) s = s.substr(slash + 1);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

namespace {

std::string overlap_key(const Sample& s) {
  std::string key = normalize_image_ref(s.image);
  key.push_back('\x1f');
  for (const auto& tok : metrics::tokenize(s.instruction)) {
    key += tok;
    key.push_back(' ');
  }
  return key;
}

}  // namespace

Corpus remove_overlap(const Corpus& target, const Corpus& source, std::size_t* removed) {
  std::set<std::string> keys;
  for (const auto& s : source.samples()) keys.insert(overlap_key(s));
  std::vector<Sample> kept;
  for (const auto& s : target.samples()) {
    if (!keys.contains(overlap_key(s))) kept.push_back(s);
  }
  if (removed != nullptr) *removed = target.size() - kept.size();
  return Corpus(target.dataset_id(), std::move(kept));
}

Split split_corpus(const Corpus& corpus, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = corpus.size();
  if (n < 2) throw InvalidArgument("split_corpus: need at least 2 samples in " + corpus.dataset_id());
  // Guard against products like 0.29 * 100 = 28.999999999999996.
  const auto n_tune =
      static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n) + 1e-9));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(spec.seed, "split:" + corpus.dataset_id()));
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<char> in_tune(n, 0);
  for (std::size_t i = 0; i < n_tune; ++i) in_tune[order[i]] = 1;

  std::vector<Sample> tune, holdout;
  json tune_ids = json::array(), holdout_ids = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = corpus.samples()[i];
    if (in_tune[i]) {
      tune.push_back(s);
      tune_ids.push_back(s.id);
    } else {
      holdout.push_back(s);
      holdout_ids.push_back(s.id);
    }
  }
  Split out;
  out.tune = Corpus(corpus.dataset_id(), std::move(tune));
  out.holdout = Corpus(corpus.dataset_id(), std::move(holdout));
  out.manifest = {{"dataset", corpus.dataset_id()},
                  {"seed", spec.seed},
                  {"train_fraction", spec.train_fraction},
                  {"input_digest", corpus.digest()},
                  {"tune", std::move(tune_ids)},
                  {"holdout", std::move(holdout_ids)},
                  {"tune_digest", out.tune.digest()},
                  {"holdout_digest", out.holdout.digest()}};
  return out;
}

std::string tagged_id(const std::string& dataset, const std::string& id) {
  return dataset + ":" + id;
}

Corpus build_eval600(const std::map<std::string, Corpus>& holdouts, const SplitSpec& spec,
                     std::string name) {
  spec.validate();
  std::vector<Sample> out;
  for (const auto& [dataset, holdout] : holdouts) {
    if (holdout.size() < spec.eval_per_dataset) {
      throw ValidationError("holdout of " + dataset + " has " + std::to_string(holdout.size()) +
                            " samples, fewer than eval_per_dataset=" +
                            std::to_string(spec.eval_per_dataset));
    }
    Rng rng(derive_seed(spec.seed, "eval:" + dataset));
    for (auto idx : rng.sample_indices(holdout.size(), spec.eval_per_dataset)) {
      Sample s = holdout.samples()[idx];
      s.id = tagged_id(dataset, s.id);
      s.source = dataset;
      out.push_back(std::move(s));
    }
  }
  return Corpus(std::move(name), std::move(out));
}

}  // namespace lion_forge::corpus
