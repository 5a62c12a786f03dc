#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "obfuskit/campaign.hpp"
#include "obfuskit/error.hpp"
#include "obfuskit/eval.hpp"
#include "obfuskit/ga.hpp"
#include "obfuskit/metrics.hpp"
#include "obfuskit/sim.hpp"
#include "obfuskit/text.hpp"

namespace py = pybind11;
using namespace obfuskit;

namespace {

eval::OutcomeClass classify_text(const std::string& response, const std::vector<std::string>& indicators,
                                 bool restricted_intent) {
  eval::QuestionMeta meta;
  meta.restricted_intent = restricted_intent;
  meta.indicators = indicators;
  return eval::classify(response, meta).cls;
}

std::string respond_json(const std::string& query, double tau, double theta, double rho, std::size_t filler) {
  auto cfg = sim::SimConfig::defaults();
  cfg.tau = tau;
  cfg.theta = theta;
  cfg.rho = rho;
  if (filler > 0) cfg.nonsense = {sim::NonsenseMode::Filler, filler};
  return sim::respond(query, cfg).to_json();
}

std::string aggregate_json(const std::vector<std::string>& classes) {
  std::vector<eval::Outcome> outs;
  for (const auto& c : classes) {
    eval::Outcome o;
    o.cls = eval::parse_outcome_class(c);
    outs.push_back(o);
  }
  return eval::aggregate(outs).to_json().dump();
}

std::string evolve_json(const std::vector<std::string>& seeds, std::size_t population_size,
                        std::size_t max_iterations, std::size_t retain_per_seed, std::uint64_t rng_seed,
                        double tau, double delta_edit) {
  ga::GAConfig cfg;
  cfg.population_size = population_size;
  cfg.max_iterations = max_iterations;
  cfg.retain_per_seed = retain_per_seed;
  cfg.rng_seed = rng_seed;
  cfg.tau = tau;
  cfg.delta_edit = delta_edit;
  py::gil_scoped_release release;
  return ga::evolve(seeds, cfg).to_json();
}

std::string run_campaign_json(const std::string& config_path, bool resume, std::optional<std::string> target,
                              std::optional<std::string> output_dir) {
  auto cfg = campaign::CampaignConfig::from_file(config_path);
  if (output_dir) cfg.output_dir = *output_dir;
  campaign::RunOptions opts;
  opts.resume = resume;
  opts.only_target = target;
  py::gil_scoped_release release;
  return campaign::run_campaign(cfg, opts).report.to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_obfuskit, m) {
  m.doc() = "obfuskit core bindings";

  static py::handle error_type = PyErr_NewException("obfuskit._obfuskit.ObfuskitError", PyExc_RuntimeError, nullptr);
  m.attr("ObfuskitError") = error_type;
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error_type(std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("levenshtein", [](const std::string& a, const std::string& b) { return metrics::levenshtein(a, b).value; },
        py::arg("a"), py::arg("b"));
  m.def("word_levenshtein",
        [](const std::vector<std::string>& a, const std::vector<std::string>& b) { return metrics::levenshtein(a, b).value; },
        py::arg("a"), py::arg("b"));
  m.def("tree_string", [](const std::string& t) { return text::TextModel::default_model().tree_string(t).str(); },
        py::arg("text"));
  m.def("obfuscation_degree", [](const std::string& v, const std::string& o) { return metrics::obfuscation_degree(v, o); },
        py::arg("variant"), py::arg("original"));
  m.def(
      "fitness",
      [](const std::string& candidate, const std::string& seed, double w1, double w2) {
        const auto f = metrics::fitness(candidate, seed, {w1, w2});
        return py::dict(py::arg("r_ob") = f.r_ob, py::arg("r_l") = f.r_l, py::arg("f_score") = f.f_score,
                        py::arg("ob") = f.ob);
      },
      py::arg("candidate"), py::arg("seed"), py::arg("w1") = 0.7, py::arg("w2") = 0.3);
  m.def("similarity", &metrics::similarity, py::arg("a"), py::arg("b"));
  m.def("_sim_respond", &respond_json, py::arg("query"), py::arg("tau") = 3.0, py::arg("theta") = 0.5,
        py::arg("rho") = 0.5, py::arg("filler_length") = 0);
  m.def(
      "classify",
      [](const std::string& r, const std::vector<std::string>& ind, bool restricted) {
        return std::string(eval::to_string(classify_text(r, ind, restricted)));
      },
      py::arg("response"), py::arg("indicators"), py::arg("restricted_intent") = true);
  m.def("_aggregate", &aggregate_json, py::arg("classes"));
  m.def("format_percent", py::overload_cast<std::uint64_t, std::uint64_t>(&eval::format_percent), py::arg("num"),
        py::arg("den"));
  m.def("_evolve", &evolve_json, py::arg("seeds"), py::arg("population_size") = 20, py::arg("max_iterations") = 30,
        py::arg("retain_per_seed") = 10, py::arg("rng_seed") = 0, py::arg("tau") = 3.0, py::arg("delta_edit") = 0.5);
  m.def("_run_campaign", &run_campaign_json, py::arg("config_path"), py::arg("resume") = false,
        py::arg("target") = py::none(), py::arg("output_dir") = py::none());
}
