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

#include "fixtures.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "json.hpp"
#include "lion_forge/digest.hpp"

#ifndef LION_FORGE_CLI_PATH
#error "LION_FORGE_CLI_PATH must point at the lion_forge executable"
#endif

namespace fixtures {

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "lion_forge_test_XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "man",    "woman",  "child",  "dog",    "cat",    "horse",  "bird",   "car",
      "bus",    "train",  "boat",   "plane",  "street", "road",   "field",  "beach",
      "table",  "chair",  "window", "door",   "tree",   "flower", "grass",  "sky",
      "water",  "river",  "hill",   "city",   "house",  "kitchen", "plate", "pizza",
      "red",    "blue",   "green",  "white",  "black",  "yellow", "small",  "large",
      "young",  "old",    "tall",   "bright", "dark",   "empty",  "busy",   "quiet",
      "near",   "under",  "behind", "beside", "above",  "inside", "across", "toward",
      "sits",   "stands", "walks",  "holds",  "looks",  "plays",  "rides",  "waits",
      "the",    "a",      "with",   "and",    "of",     "on",     "in",     "at",
      "ball",   "kite",   "phone",  "book",   "bag",    "hat",    "shirt",  "umbrella",
      "snow",   "sand",   "rock",   "wall",   "fence",  "bench",  "lamp",   "clock",
  };
  return words;
}

std::string sentence(lion_forge::Rng& rng, std::size_t n) {
  const auto& v = vocabulary();
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != 0) out += ' ';
    out += v[rng.below(v.size())];
  }
  return out;
}

lion_forge::corpus::Corpus make_corpus(const std::string& name, std::size_t n, std::uint64_t seed) {
  lion_forge::Rng rng(lion_forge::derive_seed(seed, "fixture:" + name));
  std::vector<lion_forge::corpus::Sample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "s%04zu", i);
    lion_forge::corpus::Sample s;
    s.id = id;
    s.image = "img/" + name + "/" + std::to_string(i) + ".jpg";
    s.instruction = "describe the " + sentence(rng, 2);
    s.answer = sentence(rng, 6 + rng.below(9));
    samples.push_back(std::move(s));
  }
  return lion_forge::corpus::Corpus(name, std::move(samples));
}

std::string write_dataset(const lion_forge::corpus::Corpus& c, const fs::path& dir) {
  const auto path = dir / (c.dataset_id() + ".jsonl");
  lion_forge::corpus::save_corpus(c, path);
  return c.dataset_id() + "=" + path.string();
}

void write_predictions(const fs::path& path, const std::vector<PredictionLine>& lines) {
  std::string body;
  for (const auto& l : lines) {
    nlohmann::json rec = {{"tune_dataset", l.tune}, {"eval_dataset", l.eval}, {"id", l.id}, {"output", l.output}};
    body += rec.dump() + "\n";
  }
  lion_forge::write_file(path, body);
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

RunResult run_cli(const std::vector<std::string>& args) {
  std::string cmd = shell_quote(LION_FORGE_CLI_PATH);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed");
  RunResult r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    out[fs::relative(e.path(), root).generic_string()] = lion_forge::read_file(e.path());
  }
  return out;
}

}  // namespace fixtures
