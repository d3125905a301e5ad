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

// Sentence-level caption metrics: BLEU@1-4, METEOR (exact + Porter stem
// stages), ROUGE-L and CIDEr-D.
//
// Every function is pure; IdfTable is immutable once built, so all of this is
// safe to call from any number of threads.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lion_forge::metrics {

/// Lowercase word tokens with no empty entries. Produced by tokenize().
using TokenSeq = std::vector<std::string>;

/// Lowercases, maps every byte outside [a-z0-9'] to a space, splits on runs of
/// whitespace.
TokenSeq tokenize(std::string_view text);

/// Sliding-window n-gram multiset. Keys are the n tokens joined by one space.
struct NGramCounts {
  int order = 1;
  std::map<std::string, int> counts;

  int total() const;
};

NGramCounts ngram_counts(const TokenSeq& seq, int n);

/// Cumulative BLEU@k for one candidate (geometric mean of clipped precisions
/// p_1..p_k times the brevity penalty). Orders >= 2 with no matches get add-one
/// smoothing. Returns 0 for an empty candidate.
double bleu(const TokenSeq& candidate, std::span<const TokenSeq> references, int k);

/// BLEU@1..4 in one pass; element i holds BLEU@(i+1).
std::array<double, 4> bleu_upto4(const TokenSeq& candidate,
                                 std::span<const TokenSeq> references);

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

inline constexpr double kRougeBeta = 1.2;

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

inline constexpr double kMeteorAlpha = 0.9;
inline constexpr double kMeteorBeta = 3.0;
inline constexpr double kMeteorGamma = 0.5;

/// Alignment statistics behind a METEOR score.
struct MeteorAlignment {
  // Reference position matched to each candidate position, -1 if unmatched.
  std::vector<int> ref_of;
  std::size_t matches = 0;
  std::size_t chunks = 0;
  // True when a stage hit the search budget and kept its best-so-far matching.
  bool truncated = false;
};

/// Two-stage alignment: exact tokens, then Porter stems among leftovers. Each
/// stage takes a maximum one-to-one matching with the fewest chunks; ties go
/// to the lexicographically smallest assignment (earlier candidate positions
/// to earlier reference positions).
MeteorAlignment meteor_align(const TokenSeq& candidate, const TokenSeq& reference);

/// Fmean * (1 - penalty), Fmean = PR / (alpha P + (1 - alpha) R),
/// penalty = gamma (chunks / m)^beta. A perfect alignment (every token on both
/// sides matched, one chunk) has no fragmentation penalty.
double meteor(const TokenSeq& candidate, const TokenSeq& reference);

/// Score from precomputed alignment statistics.
double meteor_from_stats(std::size_t matches, std::size_t chunks,
                         std::size_t candidate_len, std::size_t reference_len);

/// Classic Porter (1980) stemmer, steps 1a through 5b.
std::string porter_stem(std::string_view word);

inline constexpr int kCiderMaxOrder = 4;
inline constexpr double kCiderSigma = 6.0;

/// Document frequencies of 1..4-grams over a reference corpus.
class IdfTable {
 public:
  IdfTable() = default;

  bool empty() const { return corpus_size_ == 0; }
  std::size_t corpus_size() const { return corpus_size_; }

  /// Number of documents containing the n-gram, 0 if never seen.
  std::size_t document_frequency(const std::string& gram) const;

  /// log(N / max(1, df)).
  double idf(const std::string& gram) const;

  const std::map<std::string, std::size_t>& frequencies() const { return df_; }

 private:
  friend IdfTable cider_idf(std::span<const TokenSeq> reference_corpus);

  std::size_t corpus_size_ = 0;
  std::map<std::string, std::size_t> df_;
};

IdfTable cider_idf(std::span<const TokenSeq> reference_corpus);

/// CIDEr-D on the x100 reporting scale (standard CIDEr-D x10, then x10).
double cider(const TokenSeq& candidate, std::span<const TokenSeq> references,
             const IdfTable& idf);

/// The per-sample score bundle. cider is set only when an IdfTable was given.
struct MetricVector {
  double b1 = 0, b2 = 0, b3 = 0, b4 = 0, meteor = 0, rouge_l = 0;
  std::optional<double> cider;

  bool operator==(const MetricVector&) const = default;
};

/// All metrics for one candidate. METEOR and ROUGE-L take the best score over
/// the references.
MetricVector score_sample(const TokenSeq& candidate, std::span<const TokenSeq> references,
                          const IdfTable* idf = nullptr);

}  // namespace lion_forge::metrics
