#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcmopt/graph.hpp"
#include "mcmopt/milp.hpp"

namespace mcm::backend {

// a solver is configuration data: a command template plus a parser id.
// templates may use {bin} {lp} {mst} {sol} {timeout}; the parser id selects
// one of the line parsers below. MCMOPT_SOLVER_BIN overrides the binary.
struct solver_profile {
  std::string name;
  std::string binary;
  std::string command;             // without a MIP start
  std::string command_with_start;  // empty: warm starts are dropped for this solver
  std::string parser;              // plain | cbc | glpk
};

// profiles shipped as data files: <name>.profile, "key = value" lines
solver_profile parse_profile(const std::string& text, const std::string& name);

// resolution order: explicit dir argument, MCMOPT_PROFILE_DIR, a profiles/
// directory next to the executable, built-in defaults (builtin, cbc, glpsol)
solver_profile load_profile(const std::string& name, const std::string& profile_dir = "");

std::vector<std::string> builtin_profile_names();

struct solver_job {
  std::string lp_text;
  std::optional<std::string> mip_start_text;
  double timeout_seconds = 1800;
  solver_profile profile;
  std::string work_dir;  // created if missing; holds model.lp start.mst solution.sol log.txt
};

// runs the solver through the file protocol and parses its solution; never
// fabricates values: missing or unparseable output comes back as an error
milp::solution_binding solve_external(const solver_job& job);

// parsers are exposed for tests with canned solver outputs
milp::solution_binding parse_solution_plain(const std::string& text);
milp::solution_binding parse_solution_cbc(const std::string& text);
milp::solution_binding parse_solution_glpk(const std::string& text);
milp::solution_binding parse_solution(const std::string& parser_id, const std::string& text);

struct oracle_result {
  i64 optimum_adders = 0;
  adder_graph witness;
  i64 explored_states = 0;
};

// exhaustive search over odd fundamentals reachable within the word length;
// the independent ground truth for the ILP route on small instances
oracle_result bfs_oracle(const std::vector<i64>& targets, int max_adders, int wordlength,
                         bool allow_negative_shifts = true, i64 state_guard = 10'000'000);

}  // namespace mcm::backend
