#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "aconf/analysis.hpp"
#include "aconf/error.hpp"
#include "aconf/gga.hpp"
#include "aconf/harness.hpp"
#include "aconf/synthetic.hpp"

namespace py = pybind11;
using namespace aconf;

namespace {

using Assignment = std::map<std::string, std::string>;

Assignment to_dict(const ParameterSpace& space, const Configuration& c) {
  auto named = named_values(space, c);
  return {named.begin(), named.end()};
}

Configuration from_dict(const ParameterSpace& space, const Assignment& values) {
  return space.from_strings({values.begin(), values.end()});
}

RunStatus status_of(const std::string& s) {
  auto st = parse_status(s);
  if (!st) throw py::value_error("unknown run status: " + s);
  return *st;
}

std::vector<InstanceOutcome> outcomes_of(const std::vector<std::tuple<std::string, std::string, double>>& rows) {
  std::vector<InstanceOutcome> out;
  for (const auto& [id, status, runtime] : rows) out.push_back({id, {status_of(status), runtime, false}});
  return out;
}

py::dict result_dict(const ParameterSpace& space, const ConfiguratorResult& r) {
  py::dict d;
  d["incumbent"] = to_dict(space, r.incumbent);
  d["incumbent_text"] = space.to_string(r.incumbent);
  d["runs_used"] = r.runs_used;
  d["time_used"] = r.time_used;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Algorithm configuration core";

  py::register_exception<Error>(m, "AconfError", PyExc_RuntimeError);

  py::class_<ParameterSpace>(m, "ParameterSpace")
      .def_static("parse", [](const std::string& text) { return parse_pcs(text); })
      .def_static("load", &load_pcs)
      .def("serialize", [](const ParameterSpace& s) { return serialize_pcs(s); })
      .def("__len__", &ParameterSpace::size)
      .def("names", [](const ParameterSpace& s) {
        std::vector<std::string> names;
        for (const auto& p : s.parameters()) names.push_back(p.name);
        return names;
      })
      .def("default", [](const ParameterSpace& s) { return to_dict(s, s.default_configuration()); })
      .def("sample",
           [](const ParameterSpace& s, std::size_t n, std::uint64_t seed) {
             std::mt19937_64 rng(seed);
             std::vector<Assignment> out;
             for (std::size_t i = 0; i < n; ++i) out.push_back(to_dict(s, s.sample_uniform(rng)));
             return out;
           },
           py::arg("n"), py::arg("seed") = 0)
      .def("is_valid", [](const ParameterSpace& s, const Assignment& a) { return s.is_valid(from_dict(s, a)); })
      .def("neighbors",
           [](const ParameterSpace& s, const Assignment& a) {
             std::vector<Assignment> out;
             for (const auto& c : s.neighbors(from_dict(s, a))) out.push_back(to_dict(s, c));
             return out;
           })
      .def("discretize", &ParameterSpace::discretize, py::arg("grid") = 7)
      .def("__eq__", [](const ParameterSpace& a, const ParameterSpace& b) { return a == b; });

  m.def("penalized_cost",
        [](const std::string& status, double runtime, double cutoff, int k) {
          return penalized_cost(RunOutcome{status_of(status), runtime, false}, cutoff, k);
        },
        py::arg("status"), py::arg("runtime"), py::arg("cutoff"), py::arg("k") = 10);

  m.def("speedup_factor",
        [](const std::vector<std::tuple<std::string, std::string, double>>& def,
           const std::vector<std::tuple<std::string, std::string, double>>& conf, double cutoff, int k) {
          return speedup_factor(outcomes_of(def), outcomes_of(conf), {k, cutoff});
        },
        py::arg("default"), py::arg("configured"), py::arg("cutoff"), py::arg("k") = 10);

  m.def("spearman", &spearman);

  m.def("gga_schedule", [](std::size_t target, std::size_t generation) {
    return intensification_schedule(GgaParams{}, target, generation);
  });

  m.def("approaches", [] {
    std::vector<std::string> out;
    for (auto a : all_approaches()) out.push_back(to_string(a));
    return out;
  });

  m.def("configure_synthetic",
        [](const std::string& kind, const std::string& approach, std::size_t budget_runs, std::uint64_t seed,
           std::size_t train, std::size_t test) {
          auto b = standard_bundle(parse_surface_kind(kind), {.train = train, .test = test});
          Scenario sc = bundle_scenario(b, seed);
          SyntheticTarget target(b.surface, b.cutoff);
          const Approach a = parse_approach(approach);
          py::gil_scoped_release release;
          auto r = run_approach(a, sc, target, Budget::runs(budget_runs), seed);
          py::gil_scoped_acquire acquire;
          const ParameterSpace space = is_discretized(a) ? sc.space.discretize(7) : sc.space;
          py::dict d = result_dict(space, r);
          d["train_cost"] = surface_score(b.surface, space, r.incumbent, b.train, {10, b.cutoff}).mean_cost;
          d["default_train_cost"] =
              surface_score(b.surface, sc.space, sc.space.default_configuration(), b.train, {10, b.cutoff}).mean_cost;
          return d;
        },
        py::arg("kind"), py::arg("approach"), py::arg("budget_runs"), py::arg("seed") = 1, py::arg("train") = 50,
        py::arg("test") = 50);

  m.def("campaign_synthetic",
        [](const std::string& kind, const std::vector<std::string>& approaches, std::size_t budget_runs,
           std::uint64_t seed, std::size_t runs, std::size_t train, std::size_t test) {
          auto b = standard_bundle(parse_surface_kind(kind), {.train = train, .test = test});
          CampaignPlan plan;
          plan.scenario = bundle_scenario(b, seed);
          plan.approaches.clear();
          for (const auto& a : approaches) plan.approaches.push_back(parse_approach(a));
          plan.budget = Budget::runs(budget_runs);
          plan.independent_runs = runs;
          plan.seed = seed;
          SyntheticTarget target(b.surface, b.cutoff);
          CampaignReport r;
          {
            py::gil_scoped_release release;
            r = run_campaign(plan, target);
          }
          py::dict d;
          d["selected"] = r.selected_text;
          d["default"] = r.default_text;
          d["default_test"] = r.default_test.mean_cost;
          d["configured_test"] = r.configured_test.mean_cost;
          d["configured_test_evaluations"] = r.configured_test_evaluations;
          py::list entries;
          for (const auto& e : r.incumbents) {
            py::dict row;
            row["approach"] = to_string(e.approach);
            row["run"] = e.run;
            row["config"] = e.config_text;
            row["train_cost"] = e.train.mean_cost;
            entries.append(row);
          }
          d["incumbents"] = entries;
          return d;
        },
        py::arg("kind"), py::arg("approaches"), py::arg("budget_runs"), py::arg("seed") = 1, py::arg("runs") = 2,
        py::arg("train") = 20, py::arg("test") = 20);
}
