// Copyright 2026 The IterX-cpp Authors.
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

// Python bindings. Structured results cross the boundary as JSON text and
// are decoded by the pure-Python wrapper package.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "iterx/alignment.h"
#include "iterx/cli.h"
#include "iterx/corpus_io.h"
#include "iterx/engine.h"
#include "iterx/error.h"
#include "iterx/granular.h"
#include "iterx/learn.h"
#include "iterx/metrics.h"
#include "iterx/synth.h"

namespace py = pybind11;

namespace iterx {
namespace {

using CorpusPtr = std::shared_ptr<Corpus>;

CorpusPtr corpus_from_strings(const std::string &corpus_json, const std::string &ontology_json) {
  auto ontology = std::make_shared<const Ontology>(
      ontology_from_json(Json::parse(ontology_json)));
  return std::make_shared<Corpus>(corpus_from_json(Json::parse(corpus_json), ontology));
}

TemplateMap parse_predictions(const Corpus &corpus, const std::string &json) {
  return predictions_from_json(Json::parse(json), corpus);
}

py::tuple alignment_tuple(const Alignment &a) { return py::make_tuple(a.pairs, a.total); }

class PyModel {
 public:
  PyModel(const std::string &ontology_json, int dim, int layers, int heads, int ff_multiplier,
          std::uint64_t seed) {
    ModelConfig cfg;
    cfg.dim = dim;
    cfg.layers = layers;
    cfg.heads = heads;
    cfg.ff_multiplier = ff_multiplier;
    cfg.seed = seed;
    model_ = std::make_unique<Model>(
        std::make_shared<const Ontology>(ontology_from_json(Json::parse(ontology_json))), cfg);
  }
  explicit PyModel(Checkpoint ckpt)
      : model_(std::move(ckpt.model)), config_(ckpt.train_config) {}

  std::vector<double> fit(const Corpus &corpus, double alpha, const std::string &beta,
                          double gamma, double learning_rate, int epochs, std::uint64_t seed,
                          const std::string &head, std::size_t max_iter) {
    TrainConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = ExpertBeta::parse(beta);
    cfg.gamma = gamma;
    cfg.learning_rate = learning_rate;
    cfg.epochs = epochs;
    cfg.seed = seed;
    cfg.head = parse_head(head);
    cfg.max_iter = max_iter;
    cfg.validate();
    py::gil_scoped_release release;
    TrainResult result = train(*model_, corpus, cfg);
    config_ = cfg;
    return result.epoch_loss;
  }

  std::string extract_json(const Corpus &corpus, const std::string &head,
                           std::size_t max_iter) const {
    TemplateMap preds;
    {
      py::gil_scoped_release release;
      preds = extract_corpus(corpus, *model_, parse_head(head), max_iter);
    }
    return predictions_to_json(preds, corpus).dump();
  }

  void save(const std::string &path) const { save_checkpoint(*model_, config_, path); }
  std::size_t parameter_count() const { return model_->parameter_count(); }
  std::string ontology_json() const { return to_json(model_->ontology()).dump(); }

 private:
  static PolicyHead parse_head(const std::string &text) {
    auto head = parse_policy_head(text);
    if (!head) throw Error(ErrorCode::kInvalidArgument, "unknown policy head '" + text + "'");
    return *head;
  }

  std::unique_ptr<Model> model_;
  TrainConfig config_;
};

CeafVariant variant_or_throw(const std::string &text) {
  auto v = parse_variant(text);
  if (!v) throw Error(ErrorCode::kInvalidArgument, "unknown variant '" + text + "'");
  return *v;
}

Phi phi_or_throw(const std::string &text) {
  auto p = parse_phi(text);
  if (!p) throw Error(ErrorCode::kInvalidArgument, "unknown phi '" + text + "'");
  return *p;
}

}  // namespace
}  // namespace iterx

PYBIND11_MODULE(_iterx, m) {
  using namespace iterx;
  m.doc() = "Iterative template extraction and template-filling metrics";

  static py::exception<Error> error(m, "IterxError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error &e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<Corpus, CorpusPtr>(m, "Corpus")
      .def_static(
          "load",
          [](const std::string &path, const std::string &ontology_path) {
            return std::make_shared<Corpus>(load_corpus(path, ontology_path));
          },
          py::arg("path"), py::arg("ontology_path"))
      .def_static("from_json", &corpus_from_strings, py::arg("corpus_json"),
                  py::arg("ontology_json"))
      .def_static(
          "synthetic",
          [](std::uint64_t seed, int n_docs, int min_templates, int max_templates, int types,
             int slots, double distractor_rate) {
            SynthConfig cfg;
            cfg.seed = seed;
            cfg.n_docs = n_docs;
            cfg.min_templates = min_templates;
            cfg.max_templates = max_templates;
            cfg.n_template_types = types;
            cfg.slots_per_type = slots;
            cfg.distractor_rate = distractor_rate;
            return std::make_shared<Corpus>(generate(cfg));
          },
          py::arg("seed") = 1, py::arg("n_docs") = 200, py::arg("min_templates") = 1,
          py::arg("max_templates") = 3, py::arg("types") = 2, py::arg("slots") = 3,
          py::arg("distractor_rate") = 0.3)
      .def("to_json", [](const Corpus &c) { return to_json(c).dump(); })
      .def("ontology_json", [](const Corpus &c) { return to_json(*c.ontology).dump(); })
      .def("gold_json",
           [](const Corpus &c) { return predictions_to_json(c.gold, c).dump(); })
      .def_property_readonly("document_ids",
                             [](const Corpus &c) {
                               std::vector<std::string> ids;
                               for (const Document &d : c.documents) ids.push_back(d.id());
                               return ids;
                             })
      .def("__len__", [](const Corpus &c) { return c.documents.size(); });

  m.def(
      "align_optimal",
      [](const Eigen::MatrixXd &sim) { return alignment_tuple(align_optimal(sim)); },
      py::arg("similarity"));
  m.def(
      "align_bruteforce",
      [](const Eigen::MatrixXd &sim) { return alignment_tuple(align_bruteforce(sim)); },
      py::arg("similarity"));

  m.def(
      "score_json",
      [](const Corpus &corpus, const std::string &predictions, const std::string &variant,
         const std::string &phi) {
        const TemplateMap preds = parse_predictions(corpus, predictions);
        if (variant == "granular") return to_json(granular_corpus(corpus, preds)).dump();
        return to_json(score_corpus(corpus, preds, variant_or_throw(variant), phi_or_throw(phi)))
            .dump();
      },
      py::arg("corpus"), py::arg("predictions"), py::arg("variant") = "rme",
      py::arg("phi") = "phi3");

  m.def(
      "phi",
      [](const std::string &phi, std::vector<std::string> reference,
         std::vector<std::string> predicted) {
        std::sort(reference.begin(), reference.end());
        reference.erase(std::unique(reference.begin(), reference.end()), reference.end());
        std::sort(predicted.begin(), predicted.end());
        predicted.erase(std::unique(predicted.begin(), predicted.end()), predicted.end());
        return phi_value(phi_or_throw(phi), reference, predicted);
      },
      py::arg("phi"), py::arg("reference"), py::arg("predicted"));

  py::class_<PyModel>(m, "Model")
      .def(py::init<const std::string &, int, int, int, int, std::uint64_t>(),
           py::arg("ontology_json"), py::arg("dim") = 32, py::arg("layers") = 2,
           py::arg("heads") = 4, py::arg("ff_multiplier") = 4, py::arg("seed") = 7)
      .def_static(
          "load",
          [](const std::string &path) { return std::make_unique<PyModel>(load_checkpoint(path)); },
          py::arg("path"))
      .def("train", &PyModel::fit, py::arg("corpus"), py::arg("alpha") = 0.5,
           py::arg("beta") = "xent", py::arg("gamma") = 1.0, py::arg("learning_rate") = 0.005,
           py::arg("epochs") = 20, py::arg("seed") = 1, py::arg("head") = "joint",
           py::arg("max_iter") = 10)
      .def("extract_json", &PyModel::extract_json, py::arg("corpus"), py::arg("head") = "joint",
           py::arg("max_iter") = 10)
      .def("save", &PyModel::save, py::arg("path"))
      .def("ontology_json", &PyModel::ontology_json)
      .def_property_readonly("parameter_count", &PyModel::parameter_count);

  m.def(
      "cli",
      [](const std::vector<std::string> &args) {
        std::vector<std::string> full = {"iterx"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char *> argv;
        for (const std::string &a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
