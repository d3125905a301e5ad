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

#include "lion_forge/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "lion_forge/error.hpp"

namespace lion_forge::metrics {

namespace {

bool keep_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'';
}

std::string join_gram(const TokenSeq& seq, std::size_t start, int n) {
  std::string key = seq[start];
  for (int t = 1; t < n; ++t) {
    key.push_back(' ');
    key += seq[start + static_cast<std::size_t>(t)];
  }
  return key;
}

// Reference length closest to c; ties go to the shorter one.
std::size_t closest_ref_length(std::size_t c, std::span<const TokenSeq> refs) {
  std::size_t best = refs.front().size();
  for (const auto& ref : refs) {
    const auto r = ref.size();
    const auto d = r > c ? r - c : c - r;
    const auto bd = best > c ? best - c : c - best;
    if (d < bd || (d == bd && r < best)) best = r;
  }
  return best;
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::string cur;
  for (unsigned char c : text) {
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    if (keep_char(c)) {
      cur.push_back(static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

int NGramCounts::total() const {
  int t = 0;
  for (const auto& [gram, c] : counts) t += c;
  return t;
}

NGramCounts ngram_counts(const TokenSeq& seq, int n) {
  if (n < 1) throw InvalidArgument("ngram order must be >= 1, got " + std::to_string(n));
  NGramCounts out;
  out.order = n;
  const auto len = seq.size();
  const auto un = static_cast<std::size_t>(n);
  if (len < un) return out;
  for (std::size_t i = 0; i + un <= len; ++i) ++out.counts[join_gram(seq, i, n)];
  return out;
}

std::array<double, 4> bleu_upto4(const TokenSeq& candidate,
                                 std::span<const TokenSeq> references) {
  if (references.empty()) throw InvalidArgument("bleu: empty reference list");
  std::array<double, 4> out{0.0, 0.0, 0.0, 0.0};
  if (candidate.empty()) return out;

  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(closest_ref_length(candidate.size(), references));
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);

  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    const auto cand = ngram_counts(candidate, n);
    std::map<std::string, int> max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, cnt] : ngram_counts(ref, n).counts) {
        int& slot = max_ref[gram];
        slot = std::max(slot, cnt);
      }
    }
    long matched = 0;
    for (const auto& [gram, cnt] : cand.counts) {
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(cnt, it->second);
    }
    const long total = static_cast<long>(candidate.size()) - n + 1 > 0
                           ? static_cast<long>(candidate.size()) - n + 1
                           : 0;
    double p;
    if (n == 1) {
      if (matched == 0) return out;
      p = static_cast<double>(matched) / static_cast<double>(total);
    } else if (matched == 0) {
      p = 1.0 / static_cast<double>(total + 1);
    } else {
      p = static_cast<double>(matched) / static_cast<double>(total);
    }
    log_sum += std::log(p);
    out[static_cast<std::size_t>(n - 1)] = bp * std::exp(log_sum / n);
  }
  return out;
}

double bleu(const TokenSeq& candidate, std::span<const TokenSeq> references, int k) {
  if (k < 1 || k > 4) throw InvalidArgument("bleu: k must be in 1..4, got " + std::to_string(k));
  return bleu_upto4(candidate, references)[static_cast<std::size_t>(k - 1)];
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const auto l = lcs_length(candidate, reference);
  if (l == 0) return 0.0;
  const double prec = static_cast<double>(l) / static_cast<double>(candidate.size());
  const double rec = static_cast<double>(l) / static_cast<double>(reference.size());
  const double b2 = kRougeBeta * kRougeBeta;
  return (1.0 + b2) * prec * rec / (rec + b2 * prec);
}

// ---------------------------------------------------------------------------
// CIDEr-D

std::size_t IdfTable::document_frequency(const std::string& gram) const {
  auto it = df_.find(gram);
  return it == df_.end() ? 0 : it->second;
}

double IdfTable::idf(const std::string& gram) const {
  const auto df = std::max<std::size_t>(1, document_frequency(gram));
  return std::log(static_cast<double>(corpus_size_)) - std::log(static_cast<double>(df));
}

IdfTable cider_idf(std::span<const TokenSeq> reference_corpus) {
  if (reference_corpus.empty()) throw InvalidArgument("cider_idf: empty reference corpus");
  IdfTable table;
  table.corpus_size_ = reference_corpus.size();
  for (const auto& doc : reference_corpus) {
    std::set<std::string> seen;
    for (int n = 1; n <= kCiderMaxOrder; ++n) {
      for (auto& [gram, cnt] : ngram_counts(doc, n).counts) seen.insert(gram);
    }
    for (const auto& gram : seen) ++table.df_[gram];
  }
  return table;
}

namespace {

struct TfIdfVec {
  std::array<std::map<std::string, double>, kCiderMaxOrder> vec;
  std::array<double, kCiderMaxOrder> norm{};
};

TfIdfVec to_tfidf(const TokenSeq& seq, const IdfTable& idf) {
  TfIdfVec out;
  for (int n = 1; n <= kCiderMaxOrder; ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    double sq = 0.0;
    for (const auto& [gram, tf] : ngram_counts(seq, n).counts) {
      const double v = static_cast<double>(tf) * idf.idf(gram);
      out.vec[k].emplace(gram, v);
      sq += v * v;
    }
    out.norm[k] = std::sqrt(sq);
  }
  return out;
}

}  // namespace

double cider(const TokenSeq& candidate, std::span<const TokenSeq> references,
             const IdfTable& idf) {
  if (idf.empty()) throw InvalidArgument("cider: missing idf table");
  if (references.empty()) throw InvalidArgument("cider: empty reference list");
  const auto cand = to_tfidf(candidate, idf);
  std::array<double, kCiderMaxOrder> acc{};
  for (const auto& ref_seq : references) {
    const auto ref = to_tfidf(ref_seq, idf);
    const double delta =
        static_cast<double>(candidate.size()) - static_cast<double>(ref_seq.size());
    const double gauss = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
    for (std::size_t k = 0; k < kCiderMaxOrder; ++k) {
      double val = 0.0;
      for (const auto& [gram, vc] : cand.vec[k]) {
        auto it = ref.vec[k].find(gram);
        if (it == ref.vec[k].end()) continue;
        val += std::min(vc, it->second) * it->second;
      }
      if (cand.norm[k] != 0.0 && ref.norm[k] != 0.0) val /= cand.norm[k] * ref.norm[k];
      acc[k] += val * gauss;
    }
  }
  double mean = 0.0;
  for (double v : acc) mean += v;
  mean /= static_cast<double>(kCiderMaxOrder);
  mean /= static_cast<double>(references.size());
  return mean * 10.0 * 10.0;
}

MetricVector score_sample(const TokenSeq& candidate, std::span<const TokenSeq> references,
                          const IdfTable* idf) {
  if (references.empty()) throw InvalidArgument("score_sample: empty reference list");
  MetricVector mv;
  const auto b = bleu_upto4(candidate, references);
  mv.b1 = b[0];
  mv.b2 = b[1];
  mv.b3 = b[2];
  mv.b4 = b[3];
  for (const auto& ref : references) {
    mv.meteor = std::max(mv.meteor, meteor(candidate, ref));
    mv.rouge_l = std::max(mv.rouge_l, rouge_l(candidate, ref));
  }
  if (idf != nullptr) mv.cider = cider(candidate, references, *idf);
  return mv;
}

}  // namespace lion_forge::metrics
