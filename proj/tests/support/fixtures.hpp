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

// Synthetic corpora, scratch directories and a subprocess runner shared by
// the unit and acceptance tests.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lion_forge/corpus.hpp"
#include "lion_forge/random.hpp"

namespace fixtures {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

/// Plain English words; none is a Porter-stem variant of another.
const std::vector<std::string>& vocabulary();

/// n random vocabulary words joined by spaces.
std::string sentence(lion_forge::Rng& rng, std::size_t n);

/// Dataset with ids s0000.., images img/<name>/<i>.jpg and 6-14 word answers.
lion_forge::corpus::Corpus make_corpus(const std::string& name, std::size_t n, std::uint64_t seed);

/// Writes the corpus and returns "name=path" for --dataset style arguments.
std::string write_dataset(const lion_forge::corpus::Corpus& c, const fs::path& dir);

struct PredictionLine {
  std::string tune;
  std::string eval;
  std::string id;
  std::string output;
};

void write_predictions(const fs::path& path, const std::vector<PredictionLine>& lines);

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

/// Runs the command line tool with the given arguments.
RunResult run_cli(const std::vector<std::string>& args);

/// Every regular file under root, keyed by relative path.
std::map<std::string, std::string> read_tree(const fs::path& root);

}  // namespace fixtures
