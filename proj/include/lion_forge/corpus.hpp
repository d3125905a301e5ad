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

// Datasets as JSON Lines: one object per sample with keys
//   id, image, instruction, answer   (strings, id and answer nonempty)
//   turn                             (optional integer, multi-turn sources)
//   dataset                          (optional source tag, set on merged sets)
//
// Records carrying a LLaVA-style "conversations" array are expanded into one
// sample per human/gpt turn; see expand_conversation().

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace lion_forge::corpus {

struct Sample {
  std::string id;
  std::string image;
  std::string instruction;
  std::string answer;
  std::optional<int> turn;
  std::optional<std::string> source;

  bool operator==(const Sample&) const = default;
};

class Corpus {
 public:
  Corpus() = default;
  Corpus(std::string dataset_id, std::vector<Sample> samples);

  const std::string& dataset_id() const { return dataset_id_; }
  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  const Sample* find(const std::string& id) const;

  /// SHA-256 of the canonical JSON Lines serialization.
  const std::string& digest() const { return digest_; }

  /// Non-fatal findings (currently: empty corpus).
  std::vector<std::string> validation_warnings() const;

 private:
  std::string dataset_id_;
  std::vector<Sample> samples_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string digest_;
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::size_t eval_per_dataset = 600;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Reads a JSON Lines dataset. dataset_id defaults to the file stem. Every
/// parse failure is a LoadError with the 1-based line number.
Corpus load_corpus(const std::filesystem::path& path, std::string dataset_id = {});

Corpus parse_corpus(std::string_view text, std::string dataset_id, const std::string& origin);

nlohmann::json sample_to_json(const Sample& s);

/// Canonical JSON Lines: sorted keys, compact, one line per sample.
std::string serialize(const Corpus& corpus);

/// Writes the canonical form and returns its SHA-256.
std::string save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// One sample per human -> gpt exchange of a conversation record. The
/// instruction of turn t carries the earlier exchanges as context.
std::vector<Sample> expand_conversation(const nlohmann::json& record);

/// Image reference used for overlap detection: basename, lowercased.
std::string normalize_image_ref(std::string_view image);

/// Drops every target sample whose (normalized image, tokenized instruction)
/// appears in source. The number removed is written to *removed if given.
Corpus remove_overlap(const Corpus& target, const Corpus& source,
                      std::size_t* removed = nullptr);

struct Split {
  Corpus tune;
  Corpus holdout;
  nlohmann::json manifest;
};

/// Seeded shuffle; the first floor(fraction * N) go to tune. Both sides keep
/// the input order.
Split split_corpus(const Corpus& corpus, const SplitSpec& spec);

inline constexpr std::string_view kEval600Id = "eval600";

/// Exactly eval_per_dataset samples drawn from each holdout (seeded per
/// dataset). Output ids are "<dataset>:<id>" and carry their source tag.
Corpus build_eval600(const std::map<std::string, Corpus>& holdouts, const SplitSpec& spec,
                     std::string name = std::string(kEval600Id));

/// Id of a sample inside a merged, source-tagged corpus.
std::string tagged_id(const std::string& dataset, const std::string& id);

}  // namespace lion_forge::corpus
