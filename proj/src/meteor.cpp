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

// METEOR alignment search.
//
// A stage matches free candidate positions to free reference positions that
// share a key (the token, or its stem). Per key the maximum matching size is
// min(#cand, #ref), so "maximum" only constrains how many candidate positions
// of each key may stay unmatched. Among maximum matchings we minimise the
// chunk count of the combined alignment; this is a minimum common partition
// problem, so the search is a depth-first branch and bound:
//
//   * positions are visited left to right, reference options ascending and
//     "unmatched" last, which enumerates assignments in the tie-break order;
//   * the incumbent starts as a greedy longest-run matching;
//   * the bound adds one chunk for every later position that is certainly
//     matched and can never continue its predecessor's chunk.
//
// The search is exact unless it exceeds kSearchBudget nodes, in which case
// the best matching found so far is kept and the alignment is flagged.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include "lion_forge/text_metrics.hpp"

namespace lion_forge::metrics {

namespace {

constexpr std::size_t kSearchBudget = std::size_t{1} << 21;

std::size_t count_chunks(const std::vector<int>& ref_of) {
  std::size_t chunks = 0;
  for (std::size_t i = 0; i < ref_of.size(); ++i) {
    if (ref_of[i] < 0) continue;
    const bool continues = i > 0 && ref_of[i - 1] >= 0 && ref_of[i - 1] + 1 == ref_of[i];
    if (!continues) ++chunks;
  }
  return chunks;
}

class StageSearch {
 public:
  StageSearch(const std::vector<std::string>& cand_keys,
              const std::vector<std::string>& ref_keys, std::vector<int> fixed,
              std::vector<char> ref_used)
      : cand_keys_(cand_keys),
        ref_keys_(ref_keys),
        fixed_(std::move(fixed)),
        ref_used_(std::move(ref_used)) {}

  // Returns the chosen ref_of for all candidate positions (fixed + new).
  std::vector<int> run(bool* truncated) {
    const std::size_t n = cand_keys_.size();
    setup();

    best_ = greedy_assignment();
    best_cost_ = count_chunks(best_) + 1;

    current_.assign(n, -1);
    dfs(0, 0, -1);
    if (aborted_) *truncated = true;
    return best_;
  }

 private:
  void setup() {
    const std::size_t n = cand_keys_.size();
    std::map<std::string, int> key_id;
    key_of_.assign(n, -1);
    std::vector<std::size_t> cand_count, ref_count;
    auto id_for = [&](const std::string& key) {
      auto [it, inserted] = key_id.emplace(key, static_cast<int>(cand_count.size()));
      if (inserted) {
        cand_count.push_back(0);
        ref_count.push_back(0);
      }
      return it->second;
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed_[i] >= 0) continue;
      key_of_[i] = id_for(cand_keys_[i]);
      ++cand_count[static_cast<std::size_t>(key_of_[i])];
    }
    options_.assign(n, {});
    for (std::size_t j = 0; j < ref_keys_.size(); ++j) {
      if (ref_used_[j]) continue;
      auto it = key_id.find(ref_keys_[j]);
      if (it == key_id.end()) continue;
      ++ref_count[static_cast<std::size_t>(it->second)];
    }
    skips_.assign(cand_count.size(), 0);
    for (std::size_t k = 0; k < cand_count.size(); ++k) {
      skips_[k] = cand_count[k] - std::min(cand_count[k], ref_count[k]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (key_of_[i] < 0) continue;
      for (std::size_t j = 0; j < ref_keys_.size(); ++j) {
        if (!ref_used_[j] && ref_keys_[j] == cand_keys_[i]) options_[i].push_back(static_cast<int>(j));
      }
    }

    // Positions that are matched in every maximum matching and cannot extend
    // the previous position's chunk.
    auto choices = [&](std::size_t i) -> std::vector<int> {
      if (fixed_[i] >= 0) return {fixed_[i]};
      return options_[i];
    };
    lower_bound_.assign(n + 1, 0);
    for (std::size_t ii = n; ii-- > 0;) {
      bool certain = fixed_[ii] >= 0 ||
                     (key_of_[ii] >= 0 && !options_[ii].empty() &&
                      skips_[static_cast<std::size_t>(key_of_[ii])] == 0);
      bool forced_new = false;
      if (certain) {
        forced_new = true;
        if (ii > 0) {
          const auto prev = choices(ii - 1);
          for (int j : choices(ii)) {
            if (std::find(prev.begin(), prev.end(), j - 1) != prev.end()) {
              forced_new = false;
              break;
            }
          }
        }
      }
      lower_bound_[ii] = lower_bound_[ii + 1] + (forced_new ? 1 : 0);
    }
  }

  // Repeatedly commits the longest run of free, key-equal diagonal pairs
  // (ties: smallest candidate position, then smallest reference position).
  std::vector<int> greedy_assignment() const {
    const std::size_t n = cand_keys_.size();
    const std::size_t m = ref_keys_.size();
    std::vector<int> ref_of = fixed_;
    std::vector<char> cand_free(n, 0), ref_free(m, 0);
    for (std::size_t i = 0; i < n; ++i) cand_free[i] = key_of_[i] >= 0 && !options_[i].empty();
    for (std::size_t j = 0; j < m; ++j) ref_free[j] = !ref_used_[j];
    for (;;) {
      std::size_t best_len = 0, bi = 0, bj = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!cand_free[i]) continue;
        for (int jj : options_[i]) {
          const auto j = static_cast<std::size_t>(jj);
          if (!ref_free[j]) continue;
          std::size_t len = 0;
          while (i + len < n && j + len < m && cand_free[i + len] && ref_free[j + len] &&
                 cand_keys_[i + len] == ref_keys_[j + len]) {
            ++len;
          }
          if (len > best_len) {
            best_len = len;
            bi = i;
            bj = j;
          }
        }
      }
      if (best_len == 0) break;
      for (std::size_t t = 0; t < best_len; ++t) {
        ref_of[bi + t] = static_cast<int>(bj + t);
        cand_free[bi + t] = 0;
        ref_free[bj + t] = 0;
      }
    }
    return ref_of;
  }

  void dfs(std::size_t i, std::size_t chunks, int prev_ref) {
    if (aborted_) return;
    if (++nodes_ > kSearchBudget) {
      aborted_ = true;
      return;
    }
    if (chunks + lower_bound_[i] >= best_cost_) return;
    if (i == cand_keys_.size()) {
      best_cost_ = chunks;
      best_ = current_;
      return;
    }
    auto step = [&](int j) { return (prev_ref >= 0 && prev_ref + 1 == j) ? 0u : 1u; };
    if (fixed_[i] >= 0) {
      current_[i] = fixed_[i];
      dfs(i + 1, chunks + step(fixed_[i]), fixed_[i]);
      return;
    }
    if (key_of_[i] < 0 || options_[i].empty()) {
      current_[i] = -1;
      dfs(i + 1, chunks, -1);
      return;
    }
    for (int j : options_[i]) {
      auto& used = ref_used_[static_cast<std::size_t>(j)];
      if (used) continue;
      used = 1;
      current_[i] = j;
      dfs(i + 1, chunks + step(j), j);
      used = 0;
      if (aborted_) return;
    }
    auto& skips = skips_[static_cast<std::size_t>(key_of_[i])];
    if (skips > 0) {
      --skips;
      current_[i] = -1;
      dfs(i + 1, chunks, -1);
      ++skips;
    }
  }

  const std::vector<std::string>& cand_keys_;
  const std::vector<std::string>& ref_keys_;
  std::vector<int> fixed_;
  std::vector<char> ref_used_;

  std::vector<int> key_of_;
  std::vector<std::vector<int>> options_;
  std::vector<std::size_t> skips_;
  std::vector<std::size_t> lower_bound_;

  std::vector<int> current_;
  std::vector<int> best_;
  std::size_t best_cost_ = std::numeric_limits<std::size_t>::max();
  std::size_t nodes_ = 0;
  bool aborted_ = false;
};

}  // namespace

MeteorAlignment meteor_align(const TokenSeq& candidate, const TokenSeq& reference) {
  MeteorAlignment out;
  const std::size_t n = candidate.size();
  const std::size_t m = reference.size();

  // Stage 1: exact tokens.
  StageSearch exact(candidate, reference, std::vector<int>(n, -1), std::vector<char>(m, 0));
  std::vector<int> ref_of = exact.run(&out.truncated);

  // Stage 2: Porter stems over what is left.
  std::vector<std::string> cand_stems(n), ref_stems(m);
  for (std::size_t i = 0; i < n; ++i) cand_stems[i] = porter_stem(candidate[i]);
  for (std::size_t j = 0; j < m; ++j) ref_stems[j] = porter_stem(reference[j]);
  std::vector<char> used(m, 0);
  for (int j : ref_of) {
    if (j >= 0) used[static_cast<std::size_t>(j)] = 1;
  }
  StageSearch stemmed(cand_stems, ref_stems, ref_of, std::move(used));
  out.ref_of = stemmed.run(&out.truncated);

  out.matches = static_cast<std::size_t>(
      std::count_if(out.ref_of.begin(), out.ref_of.end(), [](int j) { return j >= 0; }));
  out.chunks = count_chunks(out.ref_of);
  return out;
}

double meteor_from_stats(std::size_t matches, std::size_t chunks, std::size_t candidate_len,
                         std::size_t reference_len) {
  if (matches == 0 || candidate_len == 0 || reference_len == 0) return 0.0;
  const double mm = static_cast<double>(matches);
  const double p = mm / static_cast<double>(candidate_len);
  const double r = mm / static_cast<double>(reference_len);
  const double fmean = p * r / (kMeteorAlpha * p + (1.0 - kMeteorAlpha) * r);
  const bool perfect = matches == candidate_len && matches == reference_len && chunks == 1;
  const double frag = perfect ? 0.0 : static_cast<double>(chunks) / mm;
  const double penalty = kMeteorGamma * std::pow(frag, kMeteorBeta);
  return fmean * (1.0 - penalty);
}

double meteor(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const auto a = meteor_align(candidate, reference);
  return meteor_from_stats(a.matches, a.chunks, candidate.size(), reference.size());
}

}  // namespace lion_forge::metrics
