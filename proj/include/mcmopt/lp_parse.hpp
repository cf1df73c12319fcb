#pragma once

#include <string>

#include "mcmopt/milp.hpp"

namespace mcm::milp {

// parses the LP dialect produced by emit_lp (plain rows, arrow indicators,
// integer coefficients); throws mcm::error with a line reference on bad input
model parse_lp(const std::string& text);

// parses "name value" lines as written by emit_mip_start; '#'-comments allowed
solution_binding parse_assignment(const std::string& text);

}  // namespace mcm::milp
