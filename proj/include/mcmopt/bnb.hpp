#pragma once

#include <optional>
#include <string>

#include "mcmopt/milp.hpp"

namespace mcm::bnb {

struct options {
  double timeout_seconds = 1800;
  std::optional<milp::solution_binding> warm_start;
  i64 node_limit = -1;  // < 0: unlimited
};

struct result {
  milp::solution_binding binding;
  bool proven = false;  // optimality or infeasibility proven by exhaustion
  i64 explored_nodes = 0;
  std::string log;
};

// exact depth-first branch and bound with integer bounds propagation; meant
// for the desk-scale models this tool emits, not for industrial instances
result solve(const milp::model& m, const options& opt);

}  // namespace mcm::bnb
