#pragma once

#include <optional>
#include <string>

#include "mcmopt/backend.hpp"
#include "mcmopt/models.hpp"

namespace mcm::pipeline {

struct solve_options {
  std::string solver = "builtin";      // profile name; "inproc" solves without a subprocess
  std::string profile_dir;
  std::string work_dir = "mcmopt-work";
  bool warm_start = true;
  int exhaustive_sim_limit = 12;       // exhaustive output simulation up to this w_in
};

struct output_check {
  i64 target = 0;
  i64 budget = 0;
  error_interval predicted;
  std::optional<i64> observed_neg;  // max observed deviations, exhaustive simulation
  std::optional<i64> observed_pos;
  bool pass = true;
};

struct run_report {
  std::string instance_echo;
  std::string flavor;
  std::string solver_status;
  i64 objective_value = 0;
  i64 adder_count = 0;
  int adder_depth = 0;
  i64 onebit_analytic = 0;
  i64 onebit_structural = 0;
  std::vector<output_check> outputs;
  bool verified = false;
  double wall_seconds = 0;
  std::string note;

  // byte-stable except for the wall-time line
  std::string to_string() const;
};

struct solve_result {
  run_report report;
  adder_graph graph;
  models::model_bundle bundle;
  milp::solution_binding binding;
};

// normalize -> bound -> build -> warm start -> solve -> check -> decode ->
// re-verify; throws mcm::error with a stage tag on any failure
solve_result run_solve(const models::instance& inst, const solve_options& opt);

// the full re-verification suite on an existing graph
run_report verify_graph(const adder_graph& g, const std::vector<i64>& budgets,
                        int exhaustive_sim_limit = 12);

}  // namespace mcm::pipeline
