// Python bindings: metrics, corpus statistics, training export and the
// pipeline stages. Results cross the boundary as plain dicts and lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "csdial/dataset_store.hpp"
#include "csdial/eval_harness.hpp"
#include "csdial/improver.hpp"
#include "csdial/metrics.hpp"
#include "csdial/pipeline.hpp"
#include "csdial/template_builder.hpp"

namespace py = pybind11;
using namespace csdial;

namespace {

py::dict score_dict(const metrics::ScoreTriple& s) {
  py::dict d;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  d["f1"] = s.f1;
  return d;
}

py::dict multi_ref_dict(const metrics::MultiRefScore& s) {
  py::dict d;
  d["per_reference"] = s.per_reference;
  d["max"] = s.max;
  d["min"] = s.min;
  d["avg"] = s.avg;
  return d;
}

py::dict report_dict(const StageReport& r) {
  py::dict d;
  d["subcommand"] = r.subcommand;
  d["counts"] = r.counts;
  d["drops"] = r.drops;
  d["artifacts"] = r.artifacts;
  d["warnings"] = r.warnings;
  d["output"] = r.output;
  return d;
}

// Config values arrive as Python scalars; the resolver expects strings.
ConfigLayer to_layer(const py::dict& values) {
  ConfigLayer out;
  for (const auto& [k, v] : values) {
    auto key = py::str(k).cast<std::string>();
    if (py::isinstance<py::bool_>(v)) {
      out[key] = v.cast<bool>() ? "true" : "false";
    } else {
      out[key] = py::str(v).cast<std::string>();
    }
  }
  return out;
}

metrics::ScoreFn named_metric(const std::string& name) {
  if (name == "rouge1") return [](std::string_view c, std::string_view r) { return metrics::rouge_n(c, r, 1).f1; };
  if (name == "rouge2") return [](std::string_view c, std::string_view r) { return metrics::rouge_n(c, r, 2).f1; };
  if (name == "rougeL") return [](std::string_view c, std::string_view r) { return metrics::rouge_l(c, r).f1; };
  if (name == "bleu") return [](std::string_view c, std::string_view r) { return metrics::bleu_sentence(c, r); };
  if (name == "meteor") return [](std::string_view c, std::string_view r) { return metrics::meteor(c, r); };
  throw Error(ErrorKind::kInput, "unknown metric '" + name + "' (expected rouge1, rouge2, rougeL, bleu or meteor)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Commonsense dialogue corpus toolkit";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&] { return py::object(py::exception<Error>(m, "CsdialError")); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto& type = error_type.get_stored();
      py::object inst = type(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      py::set_error(type, inst);
    }
  });

  m.def("tokenize", [](std::string_view text) { return metrics::tokenize(text).tokens; }, py::arg("text"));
  m.def("rouge_n", [](std::string_view c, std::string_view r, int n) { return score_dict(metrics::rouge_n(c, r, n)); },
        py::arg("candidate"), py::arg("reference"), py::arg("n"));
  m.def("rouge_l", [](std::string_view c, std::string_view r) { return score_dict(metrics::rouge_l(c, r)); },
        py::arg("candidate"), py::arg("reference"));
  m.def("bleu_sentence", &metrics::bleu_sentence, py::arg("candidate"), py::arg("reference"), py::arg("max_n") = 4);
  m.def("bleu_corpus",
        [](const std::vector<std::string>& c, const std::vector<std::string>& r, int n) {
          return metrics::bleu_corpus(c, r, n);
        },
        py::arg("candidates"), py::arg("references"), py::arg("max_n") = 4);
  m.def("meteor", [](std::string_view c, std::string_view r) { return metrics::meteor(c, r); }, py::arg("candidate"),
        py::arg("reference"));
  m.def("multi_ref",
        [](const std::string& metric, std::string_view candidate, const std::vector<std::string>& refs) {
          return multi_ref_dict(metrics::multi_ref(named_metric(metric), candidate, refs));
        },
        py::arg("metric"), py::arg("candidate"), py::arg("references"));
  m.def("aggregate", [](std::vector<double> v) { return multi_ref_dict(metrics::aggregate(std::move(v))); },
        py::arg("per_reference"));
  m.def("relative_improvement", &relative_improvement, py::arg("ours"), py::arg("baseline"));

  m.def("turn_count_draws",
        [](std::uint64_t seed, int count) {
          Rng rng(seed);
          std::vector<int> out;
          for (int i = 0; i < count; ++i) out.push_back(sample_turn_count(rng));
          return out;
        },
        py::arg("seed"), py::arg("count"));
  m.def("turn_moments",
        [](const std::vector<int>& values) {
          auto s = turn_moments(values);
          py::dict d;
          d["mean"] = s.mean;
          d["std"] = s.std;
          d["degenerate"] = s.degenerate;
          return d;
        },
        py::arg("values"));

  m.def("load_samples", [](const std::filesystem::path& work_dir, const std::string& split) {
    DatasetStore store(work_dir);
    py::list out;
    for (const auto& s : store.load(parse_split(split))) out.append(py::module_::import("json").attr("loads")(serialize_sample(s)));
    return out;
  }, py::arg("work_dir"), py::arg("split"));
  m.def("corpus_stats", [](const std::filesystem::path& work_dir) {
    DatasetStore store(work_dir);
    return py::module_::import("json").attr("loads")(stats_to_json(compute_stats(store)));
  }, py::arg("work_dir"));
  m.def("export_training",
        [](const std::filesystem::path& work_dir, const std::string& split, const std::string& mode) {
          DatasetStore store(work_dir);
          auto out = export_training(store.load(parse_split(split)), parse_finetune_mode(mode));
          py::list pairs;
          for (const auto& p : out.pairs) pairs.append(py::make_tuple(p.prompt, p.completion));
          py::dict d;
          d["pairs"] = pairs;
          d["incomplete_samples"] = out.incomplete_samples;
          d["warnings"] = out.warnings;
          return d;
        },
        py::arg("work_dir"), py::arg("split"), py::arg("mode"));

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init([](const py::dict& config) { return std::make_unique<Pipeline>(resolve_config({to_layer(config)})); }),
           py::arg("config"))
      .def("ingest", [](Pipeline& p) { return report_dict(p.ingest()); })
      .def("templates", [](Pipeline& p) { return report_dict(p.templates()); })
      .def("synthesize", [](Pipeline& p) { return report_dict(p.synthesize()); })
      .def("inject", [](Pipeline& p) { return report_dict(p.inject()); })
      .def("export_train", [](Pipeline& p, const std::string& mode) { return report_dict(p.export_train(parse_finetune_mode(mode))); },
           py::arg("mode"))
      .def("improve",
           [](Pipeline& p, const std::string& mode, bool baseline) { return report_dict(p.improve(parse_mode(mode), baseline)); },
           py::arg("mode"), py::arg("baseline") = false)
      .def("evaluate", [](Pipeline& p, const std::string& task) { return report_dict(p.evaluate(task)); }, py::arg("task"))
      .def("stats", [](Pipeline& p) { return report_dict(p.stats()); })
      .def("add_feedback",
           [](Pipeline& p, const std::string& sample_id, const std::string& annotator_id, const std::string& text,
              std::int64_t created_at) {
             FeedbackRecord f;
             f.record_id = "fb-" + sample_id + "-" + annotator_id;
             f.sample_id = sample_id;
             f.annotator_id = annotator_id;
             f.text = text;
             f.created_at = created_at;
             p.store().add_feedback(f);
           },
           py::arg("sample_id"), py::arg("annotator_id"), py::arg("text"), py::arg("created_at") = 0)
      .def_property_readonly("config_hash", [](const Pipeline& p) { return config_hash(p.config()); });
}
