#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "gesturemap/clusterer.hpp"
#include "gesturemap/conceptspace.hpp"
#include "gesturemap/config.hpp"
#include "gesturemap/error.hpp"
#include "gesturemap/evalstats.hpp"
#include "gesturemap/fixtures.hpp"
#include "gesturemap/gestures.hpp"
#include "gesturemap/normalizer.hpp"
#include "gesturemap/pipeline.hpp"

namespace py = pybind11;
namespace gm = gesturemap;
using nlohmann::json;

namespace {

py::object to_py(const json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

gm::Partition partition_from(const std::vector<std::vector<std::string>>& clusters) {
  gm::Partition p;
  p.clusters = clusters;
  p.canonicalize();
  return p;
}

struct PyPipeline {
  std::shared_ptr<const gm::Pipeline> impl;

  gm::RawPhrase phrase(const std::string& text, const std::string& id) const { return gm::RawPhrase{id, text}; }
};

std::vector<gm::RawPhrase> phrases_from(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::vector<gm::RawPhrase> out;
  for (const auto& [id, text] : rows) out.push_back({id, text});
  return out;
}

// A concept set bound to the pipeline that embeds its seeds. Curation
// replaces the held snapshot; earlier snapshots stay valid.
struct PyConceptSpace {
  std::shared_ptr<const gm::Pipeline> pipeline;
  std::shared_ptr<const gm::ConceptSet> set;

  void apply(const gm::CurationAction& action) {
    set = std::make_shared<const gm::ConceptSet>(gm::apply_curation(*set, action, gm::embedder_for(*pipeline)));
  }
};

}  // namespace

PYBIND11_MODULE(_gesturemap, m) {
  m.doc() = "Phrase to gesture mapping through a curated concept space";

  static py::handle error_type = py::exception<gm::Error>(m, "GesturemapError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const gm::Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error_type)(e.what());
      instance.attr("code") = std::string(gm::error_code_name(e.code()));
      PyErr_SetObject(error_type.ptr(), instance.ptr());
    }
  });

  m.def(
      "normalize",
      [](const std::string& text, const std::string& mode) {
        return to_py(gm::to_json(gm::normalize(gm::RawPhrase{"p", text}, gm::parse_mode(mode))));
      },
      py::arg("text"), py::arg("mode") = "extract");
  m.def(
      "text_only",
      [](const std::string& text, const std::string& mode) {
        return gm::text_only(gm::normalize(gm::RawPhrase{"p", text}, gm::parse_mode(mode)));
      },
      py::arg("text"), py::arg("mode") = "strip");

  py::class_<gm::PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_property(
          "mode", [](const gm::PipelineConfig& c) { return std::string(gm::mode_name(c.mode)); },
          [](gm::PipelineConfig& c, const std::string& mode) { c.mode = gm::parse_mode(mode); })
      .def_readwrite("lexicons", &gm::PipelineConfig::lexicons)
      .def_readwrite("stoplists", &gm::PipelineConfig::stoplists)
      .def_readwrite("vectors", &gm::PipelineConfig::vectors)
      .def_readwrite("symbol_vectors", &gm::PipelineConfig::symbol_vectors)
      .def_readwrite("use_canonical", &gm::PipelineConfig::use_canonical)
      .def_readwrite("w_sym", &gm::PipelineConfig::w_sym)
      .def_readwrite("theta", &gm::PipelineConfig::theta)
      .def_readwrite("tau", &gm::PipelineConfig::tau)
      .def_readwrite("seed", &gm::PipelineConfig::seed)
      .def_readwrite("fallback_gesture", &gm::PipelineConfig::fallback_gesture)
      .def_readwrite("concept_store", &gm::PipelineConfig::concept_store)
      .def_readwrite("catalog", &gm::PipelineConfig::catalog)
      .def_readwrite("corpus", &gm::PipelineConfig::corpus)
      .def("validate", &gm::PipelineConfig::validate, py::arg("check_files") = true);
  m.def("load_config", &gm::load_config, py::arg("path"));
  m.def("load_corpus", [](const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    for (auto& p : gm::load_corpus(path)) out.emplace_back(p.id, p.text);
    return out;
  });

  py::class_<PyPipeline>(m, "Pipeline")
      .def(py::init([](const gm::PipelineConfig& c) { return PyPipeline{gm::build_pipeline(c)}; }), py::arg("config"))
      .def_property_readonly("dim", [](const PyPipeline& p) { return p.impl->dim(); })
      .def(
          "trace",
          [](const PyPipeline& p, const std::string& text, const std::string& id) {
            return to_py(gm::to_json(p.impl->trace(p.phrase(text, id))));
          },
          py::arg("text"), py::arg("id") = "p")
      .def("embed", [](const PyPipeline& p, const std::string& text) { return p.impl->embed(p.phrase(text, "p")).v; })
      .def(
          "cluster",
          [](const PyPipeline& p, const std::vector<std::pair<std::string, std::string>>& phrases, double theta) {
            return gm::cluster(p.impl->embed_all(phrases_from(phrases)), theta).clusters;
          },
          py::arg("phrases"), py::arg("theta") = gm::kDefaultTheta);

  m.def(
      "cluster_vectors",
      [](const std::map<std::string, std::vector<double>>& vectors, double theta) {
        std::vector<gm::PhraseVector> items;
        for (const auto& [id, v] : vectors) {
          gm::PhraseVector pv;
          pv.source_id = id;
          pv.v = v;
          pv.is_zero = gm::l2_norm(v) == 0.0;
          pv.covered = pv.is_zero ? 0 : 1;
          items.push_back(std::move(pv));
        }
        return gm::cluster(items, theta).clusters;
      },
      py::arg("vectors"), py::arg("theta") = gm::kDefaultTheta);
  m.def(
      "score",
      [](const std::vector<std::vector<std::string>>& predicted, const std::vector<std::vector<std::string>>& gold) {
        const auto s = gm::score(partition_from(predicted), partition_from(gold));
        py::dict out;
        out["purity"] = s.purity;
        out["adjusted_rand"] = s.adjusted_rand;
        out["confusion"] = s.confusion;
        return out;
      },
      py::arg("predicted"), py::arg("gold"));

  py::class_<PyConceptSpace>(m, "ConceptSpace")
      .def_static(
          "load",
          [](const PyPipeline& p, const std::filesystem::path& path) {
            return PyConceptSpace{p.impl, std::make_shared<const gm::ConceptSet>(gm::load_concept_store(path))};
          },
          py::arg("pipeline"), py::arg("path"))
      .def_static(
          "from_clusters",
          [](const PyPipeline& p, const std::vector<std::pair<std::string, std::string>>& phrases, double theta) {
            const auto corpus = phrases_from(phrases);
            const auto partition = gm::cluster(p.impl->embed_all(corpus), theta);
            return PyConceptSpace{p.impl, std::make_shared<const gm::ConceptSet>(gm::build_concepts(
                                              partition, {}, corpus, gm::embedder_for(*p.impl)))};
          },
          py::arg("pipeline"), py::arg("phrases"), py::arg("theta") = gm::kDefaultTheta)
      .def("to_dict", [](const PyConceptSpace& s) { return to_py(gm::to_json(*s.set)); })
      .def("canonical_text", [](const PyConceptSpace& s) { return gm::canonical_store_text(*s.set); })
      .def("save", [](const PyConceptSpace& s, const std::filesystem::path& path) { gm::save_concept_store(path, *s.set); })
      .def("replay",
           [](const PyConceptSpace& s) {
             return PyConceptSpace{s.pipeline, std::make_shared<const gm::ConceptSet>(
                                                   gm::replay(*s.set, gm::embedder_for(*s.pipeline)))};
           })
      .def(
          "assign",
          [](const PyConceptSpace& s, const std::string& text, double tau, const std::string& id) {
            return to_py(gm::to_json(gm::assign(gm::RawPhrase{id, text}, *s.set, s.set->rules(), tau, *s.pipeline)));
          },
          py::arg("text"), py::arg("tau") = gm::kDefaultTau, py::arg("id") = "p")
      .def(
          "rank",
          [](const PyConceptSpace& s, const std::vector<std::string>& texts, double tau, bool require_gesture) {
            std::vector<gm::Assignment> as;
            for (std::size_t i = 0; i < texts.size(); ++i) {
              as.push_back(gm::assign(gm::RawPhrase{"p" + std::to_string(i + 1), texts[i]}, *s.set, s.set->rules(), tau,
                                      *s.pipeline));
            }
            return gm::rank_concepts_by_frequency(as, *s.set, require_gesture);
          },
          py::arg("texts"), py::arg("tau") = gm::kDefaultTau, py::arg("require_gesture") = true)
      .def("merge", [](PyConceptSpace& s, const std::string& a, const std::string& b) { s.apply(gm::curation::Merge{a, b}); })
      .def(
          "split",
          [](PyConceptSpace& s, const std::string& id, const std::vector<std::string>& members, const std::string& name) {
            s.apply(gm::curation::Split{id, members, name});
            return s.set->concepts().back().id;
          },
          py::arg("id"), py::arg("members"), py::arg("nameplate") = "")
      .def("rename",
           [](PyConceptSpace& s, const std::string& id, const std::string& name) { s.apply(gm::curation::Rename{id, name}); })
      .def("attach_gesture", [](PyConceptSpace& s, const std::string& id,
                                const std::string& gesture) { s.apply(gm::curation::AttachGesture{id, gesture}); })
      .def(
          "add_rule",
          [](PyConceptSpace& s, const std::string& match, const std::string& surface, const std::string& target,
             int priority, const std::string& note) {
            gm::OverrideRule rule{"", gm::parse_match_kind(match), surface, target, priority, note};
            if (!s.set->find(target)) {
              if (const auto* c = s.set->find_by_nameplate(target)) rule.target_concept_id = c->id;
            }
            s.apply(gm::curation::AddRule{rule});
            return s.set->rules().back().id;
          },
          py::arg("match"), py::arg("surface"), py::arg("target"), py::arg("priority") = 0, py::arg("note") = "")
      .def("remove_rule", [](PyConceptSpace& s, const std::string& id) { s.apply(gm::curation::RemoveRule{id}); })
      .def("move_seed", [](PyConceptSpace& s, const std::string& phrase_id, const std::string& from,
                           const std::string& to) { s.apply(gm::curation::MoveSeed{phrase_id, from, to}); });

  py::class_<gm::GestureMapper, std::shared_ptr<gm::GestureMapper>>(m, "GestureMapper")
      .def(py::init([](const PyConceptSpace& s, const std::filesystem::path& catalog, double tau, std::uint64_t seed,
                       const std::string& fallback) {
             return std::make_shared<gm::GestureMapper>(
                 s.pipeline, s.set, std::make_shared<const gm::GestureCatalog>(gm::load_catalog(catalog)),
                 gm::MapperSettings{tau, seed, fallback});
           }),
           py::arg("concepts"), py::arg("catalog"), py::arg("tau") = gm::kDefaultTau, py::arg("seed") = 0,
           py::arg("fallback") = "idle")
      .def(
          "map",
          [](const gm::GestureMapper& mapper, const std::string& text, const std::string& id) {
            return to_py(gm::to_json(mapper.map(gm::RawPhrase{id, text})));
          },
          py::arg("text"), py::arg("id") = "p");

  m.def(
      "shuffle_pairs",
      [](const std::vector<gm::PhraseGesturePair>& pairs, std::uint64_t seed) { return gm::shuffle_pairs(pairs, seed); },
      py::arg("pairs"), py::arg("seed") = 0);

  m.def(
      "wilcoxon_signed_rank",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto r = gm::wilcoxon_signed_rank(x, y);
        py::dict out;
        out["w"] = r.w;
        out["w_plus"] = r.w_plus;
        out["w_minus"] = r.w_minus;
        out["p"] = r.p;
        out["n_effective"] = r.n_effective;
        out["all_zero"] = r.all_zero;
        out["exact"] = r.exact;
        return out;
      },
      py::arg("x"), py::arg("y"));
  m.def("bh_adjust", [](const std::vector<double>& p) { return gm::bh_adjust(p); }, py::arg("p_values"));
  m.def(
      "run_contrasts",
      [](const std::string& csv_text, double alpha) {
        return to_py(gm::to_json(gm::run_contrasts(gm::parse_survey(csv_text), alpha)));
      },
      py::arg("csv_text"), py::arg("alpha") = 0.05);

  m.def(
      "list_fixtures",
      [](const std::optional<std::filesystem::path>& root) {
        return gm::list_fixtures(root.value_or(gm::default_fixture_root()));
      },
      py::arg("root") = py::none());
  m.def(
      "run_fixture",
      [](const std::string& name, const std::optional<std::filesystem::path>& root) {
        const auto r = gm::run_fixture(gm::load_fixture(name, root.value_or(gm::default_fixture_root())));
        py::dict out;
        out["name"] = r.name;
        out["passed"] = r.passed;
        out["diffs"] = r.diffs;
        out["assigned"] = r.assigned_nameplates;
        if (r.partition) out["clusters"] = r.partition->clusters;
        return out;
      },
      py::arg("name"), py::arg("root") = py::none());
}
