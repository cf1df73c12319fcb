#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mcmopt/backend.hpp"
#include "mcmopt/io.hpp"
#include "mcmopt/milp.hpp"
#include "mcmopt/models.hpp"
#include "mcmopt/pipeline.hpp"

namespace py = pybind11;
using namespace mcm;

namespace {

models::instance instance_from_kwargs(const std::vector<i64>& targets, const std::string& metric,
                                      int input_wordlength, const std::vector<i64>& error_budgets,
                                      i64 adder_bound, int ad_bound, double timeout) {
  models::instance inst;
  inst.targets = targets;
  auto m = models::metric_from_string(metric);
  if (!m) throw error("unknown metric '" + metric + "'");
  inst.objective = *m;
  if (input_wordlength > 0) inst.input_wordlength = input_wordlength;
  inst.error_budgets = error_budgets;
  if (adder_bound >= 0) inst.adder_bound = adder_bound;
  if (ad_bound >= 0) inst.ad_bound = ad_bound;
  inst.timeout_seconds = timeout;
  return inst;
}

py::dict report_to_dict(const pipeline::run_report& rep) {
  py::dict d;
  d["flavor"] = rep.flavor;
  d["solver_status"] = rep.solver_status;
  d["objective"] = rep.objective_value;
  d["adders"] = rep.adder_count;
  d["adder_depth"] = rep.adder_depth;
  d["onebit_analytic"] = rep.onebit_analytic;
  d["onebit_structural"] = rep.onebit_structural;
  d["verified"] = rep.verified;
  py::list outs;
  for (const pipeline::output_check& oc : rep.outputs) {
    py::dict o;
    o["target"] = oc.target;
    o["budget"] = oc.budget;
    o["eps_inf"] = oc.predicted.eps_inf;
    o["eps_sup"] = oc.predicted.eps_sup;
    if (oc.observed_neg) {
      o["observed_neg"] = *oc.observed_neg;
      o["observed_pos"] = *oc.observed_pos;
    }
    o["pass"] = oc.pass;
    outs.append(o);
  }
  d["outputs"] = outs;
  return d;
}

}  // namespace

PYBIND11_MODULE(_mcmopt, m) {
  m.doc() = "multiplierless multiple constant multiplication optimizer";

  py::register_exception<error>(m, "McmError");

  py::class_<odd_normalized>(m, "OddNormalized")
      .def_readonly("original", &odd_normalized::original)
      .def_readonly("odd", &odd_normalized::odd)
      .def_readonly("shift", &odd_normalized::shift)
      .def_readonly("negated", &odd_normalized::negated)
      .def("__repr__", [](const odd_normalized& n) {
        return "OddNormalized(odd=" + std::to_string(n.odd) + ", shift=" +
               std::to_string(n.shift) + ", negated=" +
               (n.negated ? std::string("True") : "False") + ")";
      });

  m.def("normalize_constant", &normalize_constant, py::arg("c"),
        "split a constant into sign, odd fundamental and power-of-two shift");
  m.def(
      "csd",
      [](i64 c) {
        csd_form f = csd(c);
        return py::make_tuple(f.digits, f.nonzero_count);
      },
      py::arg("c"), "canonical signed digit recoding: (digits lsb-first, nonzero count)");
  m.def("ad_lower_bound", &ad_lower_bound, py::arg("c"));
  m.def("adder_count_upper_bound", &adder_count_upper_bound, py::arg("odd_targets"));
  m.def("half_ulp_budget", &models::half_ulp_budget, py::arg("target"), py::arg("w_in"),
        py::arg("k"));

  py::class_<adder_graph>(m, "AdderGraph")
      .def_static("from_exchange", &io::from_exchange, py::arg("text"))
      .def("to_exchange", &io::to_exchange)
      .def("to_dot", &io::to_dot)
      .def_property_readonly("adder_count",
                             [](const adder_graph& g) { return g.adders.size(); })
      .def_property_readonly("input_wordlength",
                             [](const adder_graph& g) { return g.input_wordlength; })
      .def_property_readonly("fundamentals",
                             [](const adder_graph& g) {
                               std::vector<i64> f;
                               for (const adder_node& n : g.adders) f.push_back(n.fundamental);
                               return f;
                             })
      .def("validate",
           [](const adder_graph& g) {
             validation_report rep = validate(g);
             std::vector<std::string> out;
             for (const violation& v : rep.violations)
               out.push_back("node " + std::to_string(v.node) + ": " + v.rule);
             return out;
           })
      .def("evaluate", &evaluate_exact, py::arg("x"))
      .def(
          "simulate",
          [](const adder_graph& g, i64 x) {
            std::vector<std::pair<i64, i64>> out;
            for (const sim_value& s : simulate_truncated(g, x))
              out.push_back({s.approx, s.deviation});
            return out;
          },
          py::arg("x"))
      .def_property_readonly("adder_depth",
                             [](const adder_graph& g) { return adder_depth(g).max_depth; })
      .def_property_readonly("onebit_cost",
                             [](const adder_graph& g) { return count_onebit_structural(g).total; })
      .def("error_intervals",
           [](const adder_graph& g) {
             std::vector<std::pair<i64, i64>> out;
             for (const error_interval& e : propagate_error(g))
               out.push_back({e.eps_inf, e.eps_sup});
             return out;
           })
      .def(
          "check_error_budget",
          [](const adder_graph& g, const std::vector<i64>& budgets) {
            return check_error_budget(g, budgets).ok;
          },
          py::arg("budgets"))
      .def("__repr__", [](const adder_graph& g) {
        return "AdderGraph(adders=" + std::to_string(g.adders.size()) + ", outputs=" +
               std::to_string(g.outputs.size()) + ")";
      });

  m.def(
      "emit_lp",
      [](const std::vector<i64>& targets, const std::string& metric, int input_wordlength,
         const std::vector<i64>& error_budgets, i64 adder_bound, int ad_bound) {
        models::instance inst = instance_from_kwargs(targets, metric, input_wordlength,
                                                     error_budgets, adder_bound, ad_bound, 1800);
        switch (inst.objective) {
          case models::metric::adders: return milp::emit_lp(models::build_mcm_adders(inst).model);
          case models::metric::adders_ad: return milp::emit_lp(models::build_mcm_ad(inst).model);
          case models::metric::bits: return milp::emit_lp(models::build_mcm_bits(inst).model);
          default: return milp::emit_lp(models::build_tmcm(inst).model);
        }
      },
      py::arg("targets"), py::arg("metric") = "adders", py::arg("input_wordlength") = 0,
      py::arg("error_budgets") = std::vector<i64>{}, py::arg("adder_bound") = -1,
      py::arg("ad_bound") = -1, "build the ILP model and return its LP text");

  m.def(
      "solve",
      [](const std::vector<i64>& targets, const std::string& metric, int input_wordlength,
         const std::vector<i64>& error_budgets, i64 adder_bound, int ad_bound, double timeout,
         const std::string& solver, const std::string& work_dir) {
        models::instance inst = instance_from_kwargs(targets, metric, input_wordlength,
                                                     error_budgets, adder_bound, ad_bound,
                                                     timeout);
        pipeline::solve_options opt;
        opt.solver = solver;
        opt.work_dir = work_dir;
        pipeline::solve_result res = pipeline::run_solve(inst, opt);
        py::dict d = report_to_dict(res.report);
        d["graph"] = res.graph;
        d["exchange"] = io::to_exchange(res.graph);
        return d;
      },
      py::arg("targets"), py::arg("metric") = "adders", py::arg("input_wordlength") = 0,
      py::arg("error_budgets") = std::vector<i64>{}, py::arg("adder_bound") = -1,
      py::arg("ad_bound") = -1, py::arg("timeout") = 1800.0, py::arg("solver") = "inproc",
      py::arg("work_dir") = "mcmopt-work",
      "end-to-end: build, solve, verify; returns the report with the decoded graph");

  m.def(
      "verify",
      [](const adder_graph& g, const std::vector<i64>& budgets) {
        return report_to_dict(pipeline::verify_graph(g, budgets));
      },
      py::arg("graph"), py::arg("budgets") = std::vector<i64>{},
      "full re-verification of an adder graph");

  m.def(
      "oracle",
      [](const std::vector<i64>& targets, int max_adders, int wordlength, bool negative_shifts) {
        backend::oracle_result r =
            backend::bfs_oracle(targets, max_adders, wordlength, negative_shifts);
        return py::make_tuple(r.optimum_adders, r.witness, r.explored_states);
      },
      py::arg("targets"), py::arg("max_adders") = 8, py::arg("wordlength") = 8,
      py::arg("negative_shifts") = true,
      "exhaustive minimum-adder search: (optimum, witness, explored states)");
}
