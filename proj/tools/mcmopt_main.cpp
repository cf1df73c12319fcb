#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mcmopt/backend.hpp"
#include "mcmopt/io.hpp"
#include "mcmopt/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mcm;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cli", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& path, const std::string& text) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << text;
  if (!out) throw error("cli", "cannot write " + path);
}

// --error accepts an absolute integer bound or the "0.5ulp@k" shorthand
std::vector<i64> budgets_for(const std::string& text, const std::vector<i64>& targets, int w_in) {
  std::vector<i64> budgets;
  if (text.rfind("0.5ulp@", 0) == 0) {
    int k = std::stoi(text.substr(7));
    for (i64 t : targets) budgets.push_back(models::half_ulp_budget(t, w_in, k));
    return budgets;
  }
  i64 v = std::stoll(text);
  if (v < 0) throw error("cli", "error bound must be non-negative");
  budgets.assign(targets.size(), v);
  return budgets;
}

struct common_flags {
  std::string constants;
  std::string metric = "adders";
  int wordlength_in = 0;
  std::string error_spec;
  i64 adder_bound = -1;
  int ad_bound = -1;
  std::string solver = "builtin";
  double timeout = 1800;
  std::string warm = "auto";
  std::string out_dir = "mcmopt-out";
  std::vector<std::string> emit = {"report", "exchange", "dot", "lp"};
  std::string linearization = "bigM";
  bool adder_bound_slack = false;
  bool no_symmetry = false;
};

models::instance instance_from(const common_flags& f) {
  models::instance inst;
  std::istringstream is(f.constants);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (tok.empty()) continue;
    inst.targets.push_back(std::stoll(tok));
  }
  if (inst.targets.empty()) throw error("cli", "--constants must list at least one integer");
  auto m = models::metric_from_string(f.metric);
  if (!m) throw error("cli", "unknown metric " + f.metric);
  inst.objective = *m;
  if (f.wordlength_in > 0) inst.input_wordlength = f.wordlength_in;
  if (f.adder_bound >= 0) inst.adder_bound = f.adder_bound;
  if (f.ad_bound >= 0) inst.ad_bound = f.ad_bound;
  inst.timeout_seconds = f.timeout;
  inst.adder_bound_slack = f.adder_bound_slack;
  inst.symmetry_breaking = !f.no_symmetry;
  if (f.linearization == "native")
    inst.lin_mode = milp::linearize::native;
  else if (f.linearization != "bigM")
    throw error("cli", "--linearization must be bigM or native");
  if (inst.objective == models::metric::truncated) {
    if (f.error_spec.empty()) throw error("cli", "metric tmcm requires --error");
    if (!inst.input_wordlength) throw error("cli", "metric tmcm requires --wordlength-in");
    inst.error_budgets = budgets_for(f.error_spec, inst.targets, *inst.input_wordlength);
  }
  return inst;
}

void add_common(CLI::App* cmd, common_flags& f) {
  cmd->add_option("--constants", f.constants, "comma-separated target constants")->required();
  cmd->add_option("--metric", f.metric, "adders | adders-ad | bits | tmcm");
  cmd->add_option("--wordlength-in", f.wordlength_in, "input word length (bits/tmcm)");
  cmd->add_option("--error", f.error_spec, "absolute error bound or 0.5ulp@k");
  cmd->add_option("--adder-bound", f.adder_bound, "override the adder-count bound");
  cmd->add_option("--ad-bound", f.ad_bound, "bound on the adder depth");
  cmd->add_option("--solver", f.solver, "solver profile (builtin, cbc, glpsol, inproc)");
  cmd->add_option("--timeout", f.timeout, "solver time limit in seconds");
  cmd->add_option("--warm-start", f.warm, "auto | off");
  cmd->add_option("--out", f.out_dir, "artifact directory");
  cmd->add_option("--emit", f.emit, "artifacts: report exchange dot lp")->delimiter(',');
  cmd->add_option("--linearization", f.linearization, "bigM | native");
  cmd->add_flag("--adder-bound-slack", f.adder_bound_slack,
                "allow one adder beyond the derived bound (bits/tmcm)");
  cmd->add_flag("--no-symmetry", f.no_symmetry, "disable the used-slot ordering cuts");
}

bool wants(const common_flags& f, const std::string& what) {
  for (const std::string& e : f.emit)
    if (e == what) return true;
  return false;
}

int cmd_solve(const common_flags& f) {
  models::instance inst = instance_from(f);
  pipeline::solve_options opt;
  opt.solver = f.solver;
  opt.work_dir = f.out_dir + "/solver";
  opt.warm_start = f.warm != "off";
  pipeline::solve_result res = pipeline::run_solve(inst, opt);
  if (wants(f, "report")) spill(f.out_dir + "/report.txt", res.report.to_string());
  if (wants(f, "exchange")) spill(f.out_dir + "/graph.mcm", io::to_exchange(res.graph));
  if (wants(f, "dot")) spill(f.out_dir + "/graph.dot", io::to_dot(res.graph));
  if (wants(f, "lp")) spill(f.out_dir + "/model.lp", milp::emit_lp(res.bundle.model));
  {
    std::ostringstream sol;
    sol << "# status " << milp::to_string(res.binding.st) << "\n";
    sol << "# objective " << res.binding.objective_value << "\n";
    for (const auto& [name, value] : res.binding.values) sol << name << " " << value << "\n";
    spill(f.out_dir + "/solution.sol", sol.str());
  }
  std::cout << res.report.to_string();
  return 0;
}

int cmd_emit(const common_flags& f) {
  models::instance inst = instance_from(f);
  models::model_bundle bundle = [&] {
    switch (inst.objective) {
      case models::metric::adders: return models::build_mcm_adders(inst);
      case models::metric::adders_ad: return models::build_mcm_ad(inst);
      case models::metric::bits: return models::build_mcm_bits(inst);
      default: return models::build_tmcm(inst);
    }
  }();
  spill(f.out_dir + "/model.lp", milp::emit_lp(bundle.model));
  spill(f.out_dir + "/instance.txt", io::emit_instance(inst));
  adder_graph seed = models::csd_expansion_graph(bundle.inst);
  if (static_cast<i64>(seed.adders.size()) <= bundle.inst.adder_bound)
    spill(f.out_dir + "/start.mst",
          milp::emit_mip_start(bundle.model, models::bind_graph(bundle, seed)));
  std::cout << "model written to " << f.out_dir << "/model.lp\n";
  return 0;
}

int cmd_verify(const std::string& graph_path, const std::string& error_spec, int sim_limit) {
  adder_graph g = io::from_exchange(slurp(graph_path));
  std::vector<i64> budgets;
  if (!error_spec.empty()) {
    std::vector<i64> targets;
    for (const graph_output& o : g.outputs) targets.push_back(o.target);
    budgets = budgets_for(error_spec, targets, g.input_wordlength);
    // budgets arrive in target units; move them to the node's LSB scale
    for (std::size_t j = 0; j < budgets.size(); ++j)
      budgets[j] >>= std::min(g.outputs[j].post_shift, 62);
  }
  pipeline::run_report rep = pipeline::verify_graph(g, budgets, sim_limit);
  std::cout << rep.to_string();
  return rep.verified ? 0 : 1;
}

int cmd_cost(const std::string& graph_path) {
  adder_graph g = io::from_exchange(slurp(graph_path));
  validation_report vr = validate(g);
  if (!vr.ok) {
    std::cout << vr.to_string();
    return 1;
  }
  metrics_result mr = count_onebit_analytic(g);
  cost_breakdown cb = count_onebit_structural(g);
  std::vector<error_interval> eps = propagate_error(g);
  depth_info d = adder_depth(g);
  for (const adder_node& n : g.adders) {
    const node_metrics& m = mr.per_node[static_cast<std::size_t>(n.index)];
    std::cout << "node " << n.index << " (c=" << n.fundamental << "): depth "
              << d.depth[static_cast<std::size_t>(n.index)] << ", msb " << m.msb << ", B " << m.onebit_cost
              << " (structural " << cb.per_node[static_cast<std::size_t>(n.index)] << "), gain " << m.gain
              << ", carry_msb " << m.carry_msb << ", z " << m.trailing_zeros << ", eps ["
              << eps[static_cast<std::size_t>(n.index)].eps_inf << ", "
              << eps[static_cast<std::size_t>(n.index)].eps_sup << "]\n";
  }
  std::cout << "total onebit: analytic " << mr.total << ", structural " << cb.total << "\n";
  return mr.total == cb.total ? 0 : 1;
}

int cmd_oracle(const std::string& constants, int max_adders, int wordlength,
               bool no_neg_shifts, const std::string& out_dir) {
  std::vector<i64> targets;
  std::istringstream is(constants);
  std::string tok;
  while (std::getline(is, tok, ','))
    if (!tok.empty()) targets.push_back(std::stoll(tok));
  if (targets.empty()) throw error("cli", "--constants must list at least one integer");
  i64 max_odd = 1;
  for (i64 t : targets)
    if (t != 0) max_odd = std::max(max_odd, normalize_constant(t).odd);
  int w = wordlength > 0 ? wordlength : (max_odd == 1 ? 1 : ceil_log2(max_odd));
  int bound = max_adders > 0 ? max_adders : 2 * static_cast<int>(targets.size()) * w;
  backend::oracle_result res = backend::bfs_oracle(targets, bound, w, !no_neg_shifts);
  std::cout << "optimum adders: " << res.optimum_adders << "\n";
  std::cout << "explored states: " << res.explored_states << "\n";
  std::cout << io::to_exchange(res.witness);
  if (!out_dir.empty()) {
    spill(out_dir + "/witness.mcm", io::to_exchange(res.witness));
    spill(out_dir + "/witness.dot", io::to_dot(res.witness));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mcmopt - multiplierless multiple constant multiplication at minimal cost"};
  app.require_subcommand(1);

  common_flags sf;
  CLI::App* solve = app.add_subcommand("solve", "build a model, solve it, verify the result");
  add_common(solve, sf);

  common_flags ef;
  CLI::App* emit = app.add_subcommand("emit", "write the LP model and warm start without solving");
  add_common(emit, ef);

  std::string verify_graph_path, verify_error;
  int verify_sim_limit = 12;
  CLI::App* verify = app.add_subcommand("verify", "re-verify an exchange-format adder graph");
  verify->add_option("graph", verify_graph_path, "graph file (.mcm exchange format)")->required();
  verify->add_option("--error", verify_error, "budget: absolute integer or 0.5ulp@k");
  verify->add_option("--sim-limit", verify_sim_limit, "exhaustive simulation limit (w_in)");

  std::string cost_graph_path;
  CLI::App* cost = app.add_subcommand("cost", "per-node cost and error report for a graph");
  cost->add_option("graph", cost_graph_path, "graph file (.mcm exchange format)")->required();

  std::string oracle_constants, oracle_out;
  int oracle_max = 0, oracle_w = 0;
  bool oracle_noneg = false;
  CLI::App* oracle = app.add_subcommand("oracle", "exhaustive minimum-adder search (small instances)");
  oracle->add_option("--constants", oracle_constants, "comma-separated target constants")->required();
  oracle->add_option("--max-adders", oracle_max, "search bound");
  oracle->add_option("--wordlength", oracle_w, "fundamental word length");
  oracle->add_flag("--no-negative-shifts", oracle_noneg, "disable negative shifts");
  oracle->add_option("--out", oracle_out, "artifact directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return cmd_solve(sf);
    if (*emit) return cmd_emit(ef);
    if (*verify) return cmd_verify(verify_graph_path, verify_error, verify_sim_limit);
    if (*cost) return cmd_cost(cost_graph_path);
    if (*oracle)
      return cmd_oracle(oracle_constants, oracle_max, oracle_w, oracle_noneg, oracle_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
