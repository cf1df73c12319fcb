#include "mcmopt/pipeline.hpp"

#include <chrono>
#include <sstream>

#include "mcmopt/bnb.hpp"
#include "mcmopt/io.hpp"
#include "mcmopt/lp_parse.hpp"

namespace mcm::pipeline {

using models::metric;

std::string run_report::to_string() const {
  std::ostringstream os;
  os << "flavor: " << flavor << "\n";
  os << "instance: " << instance_echo;
  os << "solver_status: " << solver_status << "\n";
  os << "objective: " << objective_value << "\n";
  os << "adders: " << adder_count << "\n";
  os << "adder_depth: " << adder_depth << "\n";
  os << "onebit_analytic: " << onebit_analytic << "\n";
  os << "onebit_structural: " << onebit_structural << "\n";
  for (const output_check& oc : outputs) {
    os << "output " << oc.target << ": eps_inf " << oc.predicted.eps_inf << ", eps_sup "
       << oc.predicted.eps_sup;
    if (oc.budget > 0 || !oc.pass) os << ", budget " << oc.budget;
    if (oc.observed_neg)
      os << ", observed [" << -*oc.observed_neg << ", " << *oc.observed_pos << "]";
    os << (oc.pass ? "" : "  (FAIL)") << "\n";
  }
  os << "verified: " << (verified ? "yes" : "NO") << "\n";
  if (!note.empty()) os << "note: " << note << "\n";
  os << "wall_seconds: " << wall_seconds << "\n";
  return os.str();
}

namespace {

milp::solution_binding dispatch_solve(const models::model_bundle& bundle,
                                      const std::optional<milp::solution_binding>& warm,
                                      const solve_options& opt, double timeout,
                                      const std::string& stage_dir) {
  if (opt.solver == "inproc") {
    bnb::options bo;
    bo.timeout_seconds = timeout;
    bo.warm_start = warm;
    bnb::result r = bnb::solve(bundle.model, bo);
    return r.binding;
  }
  backend::solver_job job;
  job.profile = backend::load_profile(opt.solver, opt.profile_dir);
  job.lp_text = milp::emit_lp(bundle.model);
  if (warm) job.mip_start_text = milp::emit_mip_start(bundle.model, *warm);
  job.timeout_seconds = timeout;
  job.work_dir = stage_dir;
  return backend::solve_external(job);
}

void fill_costs(run_report& rep, const adder_graph& g) {
  depth_info d = adder_depth(g);
  metrics_result analytic = count_onebit_analytic(g);
  cost_breakdown structural = count_onebit_structural(g);
  rep.adder_count = static_cast<i64>(g.adders.size());
  rep.adder_depth = d.max_depth;
  rep.onebit_analytic = analytic.total;
  rep.onebit_structural = structural.total;
  if (analytic.total != structural.total)
    throw error("verify", "one-bit cost counters disagree: analytic " +
                              std::to_string(analytic.total) + ", structural " +
                              std::to_string(structural.total));
}

void fill_outputs(run_report& rep, const adder_graph& g, const std::vector<i64>& budgets,
                  bool budgeted, int sim_limit) {
  std::vector<error_interval> eps = propagate_error(g);
  bool simulate = g.input_wordlength <= sim_limit;
  std::vector<i64> worst_neg(g.outputs.size(), 0), worst_pos(g.outputs.size(), 0);
  if (simulate) {
    for (i64 x = 0; x <= g.input_max; ++x) {
      std::vector<sim_value> sim = simulate_truncated(g, x);
      for (std::size_t j = 0; j < g.outputs.size(); ++j) {
        i64 dev = sim[static_cast<std::size_t>(g.outputs[j].node)].deviation;
        worst_neg[j] = std::min(worst_neg[j], dev);
        worst_pos[j] = std::max(worst_pos[j], dev);
      }
    }
  }
  for (std::size_t j = 0; j < g.outputs.size(); ++j) {
    output_check oc;
    oc.target = g.outputs[j].target;
    oc.budget = budgeted ? budgets[j] : 0;
    oc.predicted = eps[static_cast<std::size_t>(g.outputs[j].node)];
    if (simulate) {
      oc.observed_neg = -worst_neg[j];
      oc.observed_pos = worst_pos[j];
      if (-worst_neg[j] > oc.predicted.eps_inf || worst_pos[j] > oc.predicted.eps_sup)
        throw error("verify", "simulated deviation escapes the predicted interval on output " +
                                  std::to_string(oc.target));
    }
    if (budgeted)
      oc.pass = oc.predicted.eps_inf <= oc.budget && oc.predicted.eps_sup <= oc.budget;
    rep.outputs.push_back(oc);
  }
  if (!simulate && g.input_wordlength > sim_limit)
    rep.note += std::string(rep.note.empty() ? "" : "; ") +
                "interval prediction only (input wordlength above the simulation limit)";
}

}  // namespace

run_report verify_graph(const adder_graph& g, const std::vector<i64>& budgets,
                        int exhaustive_sim_limit) {
  validation_report vr = validate(g);
  if (!vr.ok) throw error("verify", "graph fails validation:\n" + vr.to_string());
  run_report rep;
  rep.flavor = "verify";
  rep.instance_echo = io::to_exchange(g);
  rep.solver_status = "n/a";
  fill_costs(rep, g);
  bool budgeted = !budgets.empty();
  if (budgeted && budgets.size() != g.outputs.size())
    throw error("verify", "one budget per output required");
  fill_outputs(rep, g, budgets, budgeted, exhaustive_sim_limit);
  rep.verified = true;
  for (const output_check& oc : rep.outputs) rep.verified = rep.verified && oc.pass;
  depth_info d = adder_depth(g);
  for (const adder_node& n : g.adders)
    if (d.depth[static_cast<std::size_t>(n.index)] < ad_lower_bound(n.fundamental))
      throw error("verify", "node " + std::to_string(n.index) + " sits below its depth bound");
  return rep;
}

solve_result run_solve(const models::instance& inst, const solve_options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  solve_result res;

  // stage: build (bits/tmcm first derive the adder bound from an adders run)
  models::instance effective = inst;
  std::optional<adder_graph> warm_graph;
  if ((inst.objective == metric::bits || inst.objective == metric::truncated) &&
      !inst.adder_bound) {
    models::instance pre = inst;
    pre.objective = metric::adders;
    pre.error_budgets.clear();
    models::model_bundle pre_bundle = models::build_mcm_adders(pre);
    milp::solution_binding pre_warm =
        models::bind_graph(pre_bundle, models::csd_expansion_graph(pre_bundle.inst));
    milp::solution_binding pre_bind =
        dispatch_solve(pre_bundle, pre_warm, opt, inst.timeout_seconds / 4 + 1,
                       opt.work_dir + "/adders-stage");
    if (pre_bind.st == milp::solution_binding::status::optimal ||
        pre_bind.st == milp::solution_binding::status::feasible_timeout) {
      milp::check_result chk = milp::check_binding(pre_bundle.model, pre_bind);
      if (!chk.ok) throw error("solve", "adders-stage binding rejected: " + chk.first_violation);
      warm_graph = models::decode(pre_bundle, pre_bind);
      effective.adder_bound = static_cast<i64>(warm_graph->adders.size());
    }
  }

  models::model_bundle bundle = [&] {
    switch (inst.objective) {
      case metric::adders: return models::build_mcm_adders(effective);
      case metric::adders_ad: return models::build_mcm_ad(effective);
      case metric::bits: return models::build_mcm_bits(effective);
      default: return models::build_tmcm(effective);
    }
  }();

  // stage: warm start
  std::optional<milp::solution_binding> warm;
  if (opt.warm_start) {
    if (warm_graph && static_cast<i64>(warm_graph->adders.size()) <= bundle.inst.adder_bound) {
      adder_graph wg = *warm_graph;
      wg.input_wordlength = std::max(bundle.inst.w_in, 1);
      wg.input_max = bundle.inst.xbar;
      warm = models::bind_graph(bundle, wg);
    } else {
      adder_graph csd_graph = models::csd_expansion_graph(bundle.inst);
      if (static_cast<i64>(csd_graph.adders.size()) <= bundle.inst.adder_bound)
        warm = models::bind_graph(bundle, csd_graph);
    }
  }

  // stage: solve
  res.binding = dispatch_solve(bundle, warm, opt, inst.timeout_seconds, opt.work_dir);
  if (res.binding.st == milp::solution_binding::status::infeasible)
    throw error("solve", "model infeasible (check the adder bound and budgets)");
  if (res.binding.st == milp::solution_binding::status::failed)
    throw error("solve", "solver returned no usable solution: " + res.binding.note);

  // stage: exact recheck of the solver's claims
  milp::check_result chk = milp::check_binding(bundle.model, res.binding);
  if (!chk.ok) throw error("solve", "solver binding fails verification: " + chk.first_violation);
  {
    i128 obj = 0;
    for (const milp::term& t : bundle.model.objective.terms)
      obj += static_cast<i128>(t.coef) *
             res.binding.value_of(bundle.model.vars[static_cast<std::size_t>(t.v)].name);
    if (static_cast<i64>(obj) != res.binding.objective_value)
      throw error("solve", "solver objective claim disagrees with its assignment");
  }

  // stage: decode + re-verify
  res.graph = models::decode(bundle, res.binding);
  run_report rep;
  rep.flavor = models::to_string(inst.objective);
  rep.instance_echo = io::emit_instance(inst);
  rep.solver_status = milp::to_string(res.binding.st);
  rep.objective_value = res.binding.objective_value;
  fill_costs(rep, res.graph);
  bool budgeted = inst.objective == metric::truncated;
  std::vector<i64> budgets;
  if (budgeted) {
    for (const graph_output& o : res.graph.outputs) {
      i64 odd = normalize_constant(o.target).odd;
      for (std::size_t j = 0; j < bundle.inst.odd_targets.size(); ++j)
        if (bundle.inst.odd_targets[j] == odd) {
          budgets.push_back(bundle.inst.node_budgets[j]);
          break;
        }
    }
  }
  fill_outputs(rep, res.graph, budgets, budgeted, opt.exhaustive_sim_limit);
  if (budgeted) {
    budget_report br = check_error_budget(res.graph, budgets);
    if (!br.ok) throw error("verify", "decoded graph violates an error budget");
    bool all_zero = true;
    for (i64 b : budgets) all_zero = all_zero && b == 0;
    if (all_zero)
      rep.note += std::string(rep.note.empty() ? "" : "; ") +
                  "all budgets zero: degenerates to the bits metric";
  }
  {
    depth_info d = adder_depth(res.graph);
    for (const adder_node& n : res.graph.adders)
      if (d.depth[static_cast<std::size_t>(n.index)] < ad_lower_bound(n.fundamental))
        throw error("verify", "decoded node below its adder-depth lower bound");
  }
  rep.verified = true;
  for (const output_check& oc : rep.outputs) rep.verified = rep.verified && oc.pass;
  if (!rep.verified) throw error("verify", "an output failed its budget check");
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.report = rep;
  res.bundle = std::move(bundle);
  return res;
}

}  // namespace mcm::pipeline
