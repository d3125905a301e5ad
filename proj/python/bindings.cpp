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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lion_forge/corpus.hpp"
#include "lion_forge/digest.hpp"
#include "lion_forge/error.hpp"
#include "lion_forge/pipeline.hpp"
#include "lion_forge/quality.hpp"
#include "lion_forge/refine.hpp"
#include "lion_forge/text_metrics.hpp"

namespace py = pybind11;
namespace lf = lion_forge;
namespace pl = lion_forge::pipeline;
namespace fs = std::filesystem;
using lf::metrics::TokenSeq;

namespace {

std::vector<TokenSeq> tokenize_all(const std::vector<std::string>& texts) {
  std::vector<TokenSeq> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(lf::metrics::tokenize(t));
  return out;
}

py::dict metrics_dict(const lf::metrics::MetricVector& m) {
  py::dict d;
  d["b1"] = m.b1;
  d["b2"] = m.b2;
  d["b3"] = m.b3;
  d["b4"] = m.b4;
  d["meteor"] = m.meteor;
  d["rouge_l"] = m.rouge_l;
  if (m.cider) d["cider"] = *m.cider;
  return d;
}

lf::metrics::MetricVector metrics_from(const std::map<std::string, double>& d) {
  lf::metrics::MetricVector m;
  auto get = [&](const char* key) {
    auto it = d.find(key);
    return it == d.end() ? 0.0 : it->second;
  };
  m.b1 = get("b1");
  m.b2 = get("b2");
  m.b3 = get("b3");
  m.b4 = get("b4");
  m.meteor = get("meteor");
  m.rouge_l = get("rouge_l");
  if (d.count("cider")) m.cider = d.at("cider");
  return m;
}

py::dict outcome_dict(const pl::Outcome& o) {
  py::dict d;
  d["files"] = o.files;
  d["warnings"] = o.warnings;
  d["messages"] = o.messages;
  return d;
}

// A corpus that carries only ids, for refinement driven by plain score maps.
lf::corpus::Corpus id_corpus(const std::map<std::string, double>& scores) {
  std::vector<lf::corpus::Sample> samples;
  for (const auto& [id, _] : scores) samples.push_back({id, "", "", "-", std::nullopt, std::nullopt});
  return lf::corpus::Corpus("scores", std::move(samples));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "lion_forge core bindings";
  m.attr("__version__") = std::string(lf::kToolVersion);

  static py::exception<lf::ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
  static py::exception<lf::HoldOutViolation> hold_out(m, "HoldOutViolation", validation_error.ptr());
  static py::exception<lf::IncompleteError> incomplete(m, "IncompleteError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const lf::HoldOutViolation& e) {
      py::set_error(hold_out, e.what());
    } catch (const lf::ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const lf::IncompleteError& e) {
      py::set_error(incomplete, e.what());
    }
  });

  // Metrics
  m.def("tokenize", &lf::metrics::tokenize, py::arg("text"));
  m.def(
      "bleu",
      [](const std::string& cand, const std::vector<std::string>& refs, int k) {
        return lf::metrics::bleu(lf::metrics::tokenize(cand), tokenize_all(refs), k);
      },
      py::arg("candidate"), py::arg("references"), py::arg("k") = 4);
  m.def(
      "rouge_l",
      [](const std::string& cand, const std::string& ref) {
        return lf::metrics::rouge_l(lf::metrics::tokenize(cand), lf::metrics::tokenize(ref));
      },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "meteor",
      [](const std::string& cand, const std::string& ref) {
        return lf::metrics::meteor(lf::metrics::tokenize(cand), lf::metrics::tokenize(ref));
      },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "cider",
      [](const std::string& cand, const std::vector<std::string>& refs, const std::vector<std::string>& corpus) {
        const auto idf = lf::metrics::cider_idf(tokenize_all(corpus));
        return lf::metrics::cider(lf::metrics::tokenize(cand), tokenize_all(refs), idf);
      },
      py::arg("candidate"), py::arg("references"), py::arg("reference_corpus"),
      "CIDEr-D on the x100 scale with idf taken from reference_corpus.");
  m.def(
      "score_sample",
      [](const std::string& cand, const std::vector<std::string>& refs,
         const std::optional<std::vector<std::string>>& corpus) {
        const auto tok_refs = tokenize_all(refs);
        if (!corpus) return metrics_dict(lf::metrics::score_sample(lf::metrics::tokenize(cand), tok_refs));
        const auto idf = lf::metrics::cider_idf(tokenize_all(*corpus));
        return metrics_dict(lf::metrics::score_sample(lf::metrics::tokenize(cand), tok_refs, &idf));
      },
      py::arg("candidate"), py::arg("references"), py::arg("reference_corpus") = py::none());

  // Quality
  m.def(
      "combo_members",
      [](const std::string& combo) {
        const auto parsed = lf::quality::MQCombo::parse(combo);
        std::vector<std::string> out;
        for (auto metric : parsed.members()) {
          out.emplace_back(lf::quality::metric_name(metric));
        }
        return out;
      },
      py::arg("combo"));
  m.def(
      "meta_quality",
      [](const std::map<std::string, double>& metrics, const std::string& combo) {
        return lf::quality::meta_quality(metrics_from(metrics), lf::quality::MQCombo::parse(combo));
      },
      py::arg("metrics"), py::arg("combo") = "C1");
  m.def(
      "dataset_quality",
      [](const std::map<std::string, std::map<std::string, double>>& mq_d) {
        std::vector<std::string> ids;
        for (const auto& [t, _] : mq_d) ids.push_back(t);
        lf::quality::DQMatrix matrix(ids);
        for (const auto& [t, row] : mq_d) {
          for (const auto& [e, v] : row) matrix.set(t, e, v);
        }
        return lf::quality::dataset_quality(matrix);
      },
      py::arg("mq_d"), "DQ per dataset from {tune: {eval: MQ^D}} over all cross pairs.");
  m.def("sample_quality", &lf::quality::sample_quality, py::arg("dq"), py::arg("per_tuner_mq"));

  // Refinement on plain {sample_id: SQ} maps
  m.def("portion_count", &lf::refine::portion_count, py::arg("portion"), py::arg("n"));
  m.def(
      "refine_s1",
      [](const std::map<std::string, double>& sq, double portion) {
        return lf::refine::refine_s1(id_corpus(sq), sq, portion).ids;
      },
      py::arg("sq"), py::arg("portion"));
  m.def(
      "refine_s3",
      [](const std::map<std::string, double>& sq, double lambda) {
        const auto sel = lf::refine::refine_s3(id_corpus(sq), sq, lambda);
        return py::make_tuple(sel.ids, *sel.interval);
      },
      py::arg("sq"), py::arg("lam"));

  // Commands
  m.def(
      "prepare",
      [](std::vector<std::string> datasets, fs::path out, std::vector<std::string> dedup,
         std::vector<std::uint64_t> seeds, double train_fraction, std::size_t eval_n, bool eval600) {
        return outcome_dict(pl::prepare({std::move(datasets), std::move(dedup), std::move(seeds), train_fraction,
                                         eval_n, eval600, std::move(out)}));
      },
      py::arg("datasets"), py::arg("out"), py::arg("dedup") = std::vector<std::string>{},
      py::arg("seeds") = std::vector<std::uint64_t>{0}, py::arg("train_fraction") = 0.8,
      py::arg("eval_n") = 600, py::arg("eval600") = true);
  m.def(
      "mock_generate",
      [](std::vector<std::string> datasets, fs::path out, std::string mode, double rate,
         std::optional<fs::path> eval600, std::uint64_t seed, std::vector<std::string> tuner_modes,
         std::vector<std::string> tuner_rates) {
        pl::MockConfig c;
        c.datasets = std::move(datasets);
        c.eval600 = std::move(eval600);
        c.mode = pl::parse_mock_mode(mode);
        c.rate = rate;
        c.tuner_modes = std::move(tuner_modes);
        c.tuner_rates = std::move(tuner_rates);
        c.seed = seed;
        c.out = std::move(out);
        return outcome_dict(pl::mock_generate(c));
      },
      py::arg("datasets"), py::arg("out"), py::arg("mode") = "echo", py::arg("rate") = 0.3,
      py::arg("eval600") = py::none(), py::arg("seed") = 0, py::arg("tuner_modes") = std::vector<std::string>{},
      py::arg("tuner_rates") = std::vector<std::string>{});
  m.def(
      "score",
      [](std::vector<std::string> datasets, std::vector<fs::path> predictions, fs::path out,
         std::optional<fs::path> eval600, std::string combo, bool allow_missing, bool cider, int workers) {
        pl::ScoreConfig c;
        c.datasets = std::move(datasets);
        c.eval600 = std::move(eval600);
        c.predictions = std::move(predictions);
        c.combo = std::move(combo);
        c.allow_missing = allow_missing;
        c.cider = cider;
        c.workers = workers;
        c.out = std::move(out);
        pl::Outcome outcome;
        {
          py::gil_scoped_release release;
          outcome = pl::score(c);
        }
        return outcome_dict(outcome);
      },
      py::arg("datasets"), py::arg("predictions"), py::arg("out"), py::arg("eval600") = py::none(),
      py::arg("combo") = "C1", py::arg("allow_missing") = false, py::arg("cider") = false,
      py::arg("workers") = 1);
  m.def(
      "quality",
      [](fs::path tensor, fs::path out, std::optional<std::string> combo) {
        return outcome_dict(pl::quality({std::move(tensor), std::move(combo), std::move(out)}));
      },
      py::arg("tensor"), py::arg("out"), py::arg("combo") = py::none());
  m.def(
      "ablate_mq",
      [](fs::path tensor, fs::path out, std::vector<std::string> combos) {
        return outcome_dict(pl::ablate_mq({std::move(tensor), std::move(combos), std::move(out)}));
      },
      py::arg("tensor"), py::arg("out"), py::arg("combos") = std::vector<std::string>{"C1", "C2", "C3"});
  m.def(
      "refine",
      [](fs::path quality, std::vector<std::string> datasets, fs::path out, std::string strategy,
         std::vector<double> portions, std::vector<double> lambdas, std::uint64_t seed) {
        return outcome_dict(pl::refine({std::move(quality), std::move(datasets), std::move(strategy),
                                        std::move(portions), std::move(lambdas), seed, std::move(out)}));
      },
      py::arg("quality"), py::arg("datasets"), py::arg("out"), py::arg("strategy") = "S1",
      py::arg("portions") = std::vector<double>{0.7}, py::arg("lambdas") = std::vector<double>{1.0},
      py::arg("seed") = 0);
  m.def(
      "assemble",
      [](fs::path selection, std::vector<std::string> datasets, fs::path out, std::size_t eval_n,
         std::uint64_t seed, std::string name) {
        return outcome_dict(pl::assemble(
            {std::move(selection), std::move(datasets), eval_n, seed, std::move(name), std::move(out)}));
      },
      py::arg("selection"), py::arg("datasets"), py::arg("out"), py::arg("eval_n") = 600, py::arg("seed") = 0,
      py::arg("name") = "revo_lion");
  m.def(
      "verify", [](const fs::path& root) { return pl::verify(root); }, py::arg("root"),
      "Problems found re-checking every manifest under root; empty when clean.");
}
