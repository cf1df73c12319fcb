#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcmopt/base.hpp"

namespace mcm::milp {

enum class var_kind { binary, integer };

using var_id = int;

struct var {
  std::string name;
  var_kind kind = var_kind::integer;
  i64 lower = 0;
  i64 upper = 0;
};

struct term {
  i64 coef = 0;
  var_id v = -1;
};

struct lin_expr {
  std::vector<term> terms;
  i64 constant = 0;  // folded into the right-hand side when a row is added

  lin_expr() = default;
  lin_expr(i64 coef, var_id v) { terms.push_back({coef, v}); }
  explicit lin_expr(var_id v) { terms.push_back({1, v}); }

  lin_expr& add(i64 coef, var_id v) {
    if (coef != 0) terms.push_back({coef, v});
    return *this;
  }
  lin_expr& add(const lin_expr& e) {
    for (const term& t : e.terms) terms.push_back(t);
    constant += e.constant;
    return *this;
  }
  lin_expr& sub(const lin_expr& e) {
    for (const term& t : e.terms) terms.push_back({-t.coef, t.v});
    constant -= e.constant;
    return *this;
  }
};

enum class relation { le, eq, ge };

struct indicator {
  var_id guard = -1;
  int active_when = 1;
};

struct constraint {
  std::string name;
  lin_expr lhs;
  relation rel = relation::le;
  i64 rhs = 0;
  std::optional<indicator> ind;      // native indicator; absent for plain rows
  bool from_big_m = false;           // provenance for the tightness checks
  std::optional<indicator> big_m_from;  // the guard this big-M row linearizes
};

enum class linearize { native, big_m };

struct model {
  std::string name = "model";
  std::vector<var> vars;
  std::vector<constraint> constraints;
  lin_expr objective;  // sense is always minimize
  std::map<std::string, std::string> metadata;

  var_id add_var(const std::string& name, var_kind kind, i64 lower, i64 upper);
  var_id binary(const std::string& name) { return add_var(name, var_kind::binary, 0, 1); }
  var_id integer(const std::string& name, i64 lower, i64 upper) {
    return add_var(name, var_kind::integer, lower, upper);
  }
  var_id lookup(const std::string& name) const;

  void add(const std::string& name, lin_expr lhs, relation rel, i64 rhs);

  i64 expr_min(const lin_expr& e) const;
  i64 expr_max(const lin_expr& e) const;

private:
  std::unordered_map<std::string, var_id> by_name_;
};

struct solution_binding {
  enum class status { optimal, feasible_timeout, infeasible, failed };
  status st = status::failed;
  i64 objective_value = 0;
  std::map<std::string, i64> values;
  std::string note;

  bool has(const std::string& name) const { return values.count(name) != 0; }
  i64 value_of(const std::string& name) const;
};

std::string to_string(solution_binding::status st);

// guard = active_when activates lhs REL rhs; big_m mode rewrites with the
// tightest constant derivable from variable bounds
void add_indicator(model& m, var_id guard, int active_when, lin_expr lhs, relation rel, i64 rhs,
                   linearize mode, const std::string& name);

// result is pinned to values[i] exactly when selectors[i] = 1; adds the
// one-hot sum when asked
void encode_one_hot_table(model& m, const std::vector<var_id>& selectors,
                          const std::vector<i64>& values, var_id result, linearize mode,
                          const std::string& prefix, bool add_selector_sum);

// result = max(operands), pinned exactly via one choice binary per operand
void encode_max(model& m, var_id result, const std::vector<lin_expr>& operands, linearize mode,
                const std::string& prefix);

void encode_min(model& m, var_id result, const std::vector<lin_expr>& operands, linearize mode,
                const std::string& prefix);

std::string emit_lp(const model& m);

struct check_result {
  bool ok = true;
  std::string first_violation;
};

// exact integer re-evaluation of bounds, integrality and every constraint
check_result check_binding(const model& m, const solution_binding& b);

// one "name value" line per declared variable; rejects infeasible bindings
std::string emit_mip_start(const model& m, const solution_binding& b);

}  // namespace mcm::milp
