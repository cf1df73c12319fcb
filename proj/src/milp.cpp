#include "mcmopt/milp.hpp"

#include <algorithm>
#include <sstream>

namespace mcm::milp {

var_id model::add_var(const std::string& vname, var_kind kind, i64 lower, i64 upper) {
  if (lower > upper) throw error("milp", "bounds crossed for variable " + vname);
  if (kind == var_kind::binary && (lower < 0 || upper > 1))
    throw error("milp", "binary bounds outside [0,1] for " + vname);
  if (by_name_.count(vname)) throw error("milp", "duplicate variable name " + vname);
  var_id id = static_cast<var_id>(vars.size());
  vars.push_back({vname, kind, lower, upper});
  by_name_[vname] = id;
  return id;
}

var_id model::lookup(const std::string& vname) const {
  auto it = by_name_.find(vname);
  if (it == by_name_.end()) throw error("milp", "unknown variable " + vname);
  return it->second;
}

void model::add(const std::string& cname, lin_expr lhs, relation rel, i64 rhs) {
  rhs -= lhs.constant;
  lhs.constant = 0;
  for (const term& t : lhs.terms)
    if (t.v < 0 || t.v >= static_cast<var_id>(vars.size()))
      throw error("milp", "constraint " + cname + " references an undeclared variable");
  constraints.push_back({cname, std::move(lhs), rel, rhs, std::nullopt, false, std::nullopt});
}

i64 model::expr_min(const lin_expr& e) const {
  i128 acc = e.constant;
  for (const term& t : e.terms) {
    const var& v = vars[static_cast<std::size_t>(t.v)];
    acc += static_cast<i128>(t.coef) * (t.coef >= 0 ? v.lower : v.upper);
  }
  if (acc > INT64_MAX || acc < INT64_MIN) throw error("milp", "expression bound overflow");
  return static_cast<i64>(acc);
}

i64 model::expr_max(const lin_expr& e) const {
  i128 acc = e.constant;
  for (const term& t : e.terms) {
    const var& v = vars[static_cast<std::size_t>(t.v)];
    acc += static_cast<i128>(t.coef) * (t.coef >= 0 ? v.upper : v.lower);
  }
  if (acc > INT64_MAX || acc < INT64_MIN) throw error("milp", "expression bound overflow");
  return static_cast<i64>(acc);
}

i64 solution_binding::value_of(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw error("binding", "no value for variable " + name);
  return it->second;
}

std::string to_string(solution_binding::status st) {
  switch (st) {
    case solution_binding::status::optimal: return "optimal";
    case solution_binding::status::feasible_timeout: return "feasible(timeout)";
    case solution_binding::status::infeasible: return "infeasible";
    default: return "error";
  }
}

namespace {

void add_big_m_le(model& m, var_id guard, int active_when, const lin_expr& lhs, i64 rhs,
                  const std::string& name) {
  // lhs <= rhs + M * (guard - active)^2 with M = max(lhs) - rhs, skipped when
  // the row is already implied by bounds
  i64 mx = m.expr_max(lhs);
  i64 big = mx - rhs;
  if (big <= 0) return;
  lin_expr row = lhs;
  i64 new_rhs;
  if (active_when == 1) {
    row.add(big, guard);  // lhs + M*y <= rhs + M
    new_rhs = rhs + big;
  } else {
    row.add(-big, guard);  // lhs - M*y <= rhs
    new_rhs = rhs;
  }
  m.constraints.push_back(
      {name, std::move(row), relation::le, new_rhs, std::nullopt, true, indicator{guard, active_when}});
}

}  // namespace

void add_indicator(model& m, var_id guard, int active_when, lin_expr lhs, relation rel, i64 rhs,
                   linearize mode, const std::string& name) {
  if (guard < 0 || guard >= static_cast<var_id>(m.vars.size()) ||
      m.vars[static_cast<std::size_t>(guard)].kind != var_kind::binary)
    throw error("milp", "indicator guard must be a declared binary: " + name);
  if (active_when != 0 && active_when != 1)
    throw error("milp", "indicator activation must be 0 or 1: " + name);
  rhs -= lhs.constant;
  lhs.constant = 0;
  if (mode == linearize::native) {
    m.constraints.push_back(
        {name, std::move(lhs), rel, rhs, indicator{guard, active_when}, false, std::nullopt});
    return;
  }
  // big-M rewriting; an equality becomes two one-sided rows
  if (rel == relation::le || rel == relation::eq)
    add_big_m_le(m, guard, active_when, lhs, rhs, name + "_up");
  if (rel == relation::ge || rel == relation::eq) {
    lin_expr neg;
    neg.sub(lhs);
    add_big_m_le(m, guard, active_when, neg, -rhs, name + "_lo");
  }
}

void encode_one_hot_table(model& m, const std::vector<var_id>& selectors,
                          const std::vector<i64>& values, var_id result, linearize mode,
                          const std::string& prefix, bool add_selector_sum) {
  if (selectors.empty() || selectors.size() != values.size())
    throw error("milp", "one-hot table needs matching non-empty selectors and values: " + prefix);
  if (add_selector_sum) {
    lin_expr sum;
    for (var_id s : selectors) sum.add(1, s);
    m.add(prefix + "_onehot", std::move(sum), relation::eq, 1);
  }
  for (std::size_t i = 0; i < selectors.size(); ++i) {
    lin_expr body(result);
    add_indicator(m, selectors[i], 1, std::move(body), relation::eq, values[i], mode,
                  prefix + "_row" + std::to_string(i));
  }
}

namespace {

void encode_extremum(model& m, var_id result, const std::vector<lin_expr>& operands,
                     linearize mode, const std::string& prefix, bool is_max) {
  if (operands.empty()) throw error("milp", "extremum of no operands: " + prefix);
  if (operands.size() == 1) {
    lin_expr side(result);
    side.sub(operands[0]);
    m.add(prefix + "_eq", std::move(side), relation::eq, 0);
    return;
  }
  std::vector<var_id> pick;
  for (std::size_t i = 0; i < operands.size(); ++i) {
    lin_expr side(result);
    side.sub(operands[i]);
    m.add(prefix + (is_max ? "_ge" : "_le") + std::to_string(i), side,
          is_max ? relation::ge : relation::le, 0);
    var_id d = m.binary(prefix + "_pick" + std::to_string(i));
    pick.push_back(d);
    lin_expr tight(result);
    tight.sub(operands[i]);
    add_indicator(m, d, 1, std::move(tight), is_max ? relation::le : relation::ge, 0, mode,
                  prefix + "_tight" + std::to_string(i));
  }
  lin_expr sum;
  for (var_id d : pick) sum.add(1, d);
  m.add(prefix + "_pickone", std::move(sum), relation::eq, 1);
}

}  // namespace

void encode_max(model& m, var_id result, const std::vector<lin_expr>& operands, linearize mode,
                const std::string& prefix) {
  encode_extremum(m, result, operands, mode, prefix, true);
}

void encode_min(model& m, var_id result, const std::vector<lin_expr>& operands, linearize mode,
                const std::string& prefix) {
  encode_extremum(m, result, operands, mode, prefix, false);
}

namespace {

void append_wrapped(std::ostringstream& os, std::string& line, const std::string& piece) {
  if (line.size() + piece.size() > 76) {
    os << line << "\n";
    line = "   ";
  }
  line += piece;
}

std::string format_expr(const model& m, const lin_expr& e) {
  // canonical order: variable creation order, coefficients folded
  std::map<var_id, i64> folded;
  for (const term& t : e.terms) folded[t.v] += t.coef;
  std::string out;
  bool first = true;
  for (const auto& [v, c] : folded) {
    if (c == 0) continue;
    std::string piece;
    if (first) {
      if (c == -1)
        piece = "- ";
      else if (c != 1)
        piece = std::to_string(c) + " ";
      first = false;
    } else {
      piece = c < 0 ? " - " : " + ";
      i64 a = c < 0 ? -c : c;
      if (a != 1) piece += std::to_string(a) + " ";
    }
    piece += m.vars[static_cast<std::size_t>(v)].name;
    out += piece;
  }
  if (out.empty()) out = "0 " + m.vars.at(0).name;
  return out;
}

const char* rel_str(relation r) {
  switch (r) {
    case relation::le: return "<=";
    case relation::eq: return "=";
    default: return ">=";
  }
}

}  // namespace

std::string emit_lp(const model& m) {
  std::ostringstream os;
  os << "\\ " << m.name << "\n";
  for (const auto& [k, v] : m.metadata) os << "\\ " << k << ": " << v << "\n";
  os << "Minimize\n";
  {
    std::string line = " obj: ";
    std::istringstream terms(format_expr(m, m.objective));
    std::string tok;
    while (std::getline(terms, tok, ' ')) append_wrapped(os, line, tok + " ");
    os << line << "\n";
  }
  os << "Subject To\n";
  for (const constraint& c : m.constraints) {
    std::string line = " " + c.name + ": ";
    if (c.ind) {
      line += m.vars[static_cast<std::size_t>(c.ind->guard)].name + " = " +
              std::to_string(c.ind->active_when) + " -> ";
    }
    std::istringstream terms(format_expr(m, c.lhs));
    std::string tok;
    while (std::getline(terms, tok, ' ')) append_wrapped(os, line, tok + " ");
    append_wrapped(os, line, std::string(rel_str(c.rel)) + " " + std::to_string(c.rhs));
    os << line << "\n";
  }
  os << "Bounds\n";
  for (const var& v : m.vars) {
    if (v.kind == var_kind::binary) continue;
    os << " " << v.lower << " <= " << v.name << " <= " << v.upper << "\n";
  }
  bool any_int = false, any_bin = false;
  for (const var& v : m.vars) {
    any_int |= v.kind == var_kind::integer;
    any_bin |= v.kind == var_kind::binary;
  }
  if (any_int) {
    os << "Generals\n";
    std::string line = " ";
    for (const var& v : m.vars)
      if (v.kind == var_kind::integer) append_wrapped(os, line, v.name + " ");
    os << line << "\n";
  }
  if (any_bin) {
    os << "Binaries\n";
    std::string line = " ";
    for (const var& v : m.vars)
      if (v.kind == var_kind::binary) append_wrapped(os, line, v.name + " ");
    os << line << "\n";
  }
  os << "End\n";
  return os.str();
}

namespace {

i128 eval_expr(const model& m, const lin_expr& e, const solution_binding& b) {
  i128 acc = e.constant;
  for (const term& t : e.terms)
    acc += static_cast<i128>(t.coef) * b.value_of(m.vars[static_cast<std::size_t>(t.v)].name);
  return acc;
}

}  // namespace

check_result check_binding(const model& m, const solution_binding& b) {
  for (const var& v : m.vars) {
    if (!b.has(v.name)) return {false, "missing value for " + v.name};
    i64 x = b.value_of(v.name);
    if (x < v.lower || x > v.upper)
      return {false, v.name + " = " + std::to_string(x) + " outside [" +
                         std::to_string(v.lower) + ", " + std::to_string(v.upper) + "]"};
  }
  for (const constraint& c : m.constraints) {
    if (c.ind) {
      i64 g = b.value_of(m.vars[static_cast<std::size_t>(c.ind->guard)].name);
      if (g != c.ind->active_when) continue;
    }
    i128 lhs = eval_expr(m, c.lhs, b);
    bool sat = c.rel == relation::le   ? lhs <= c.rhs
               : c.rel == relation::eq ? lhs == c.rhs
                                       : lhs >= c.rhs;
    if (!sat)
      return {false, c.name + ": lhs " + std::to_string(static_cast<i64>(lhs)) + " " +
                         rel_str(c.rel) + " " + std::to_string(c.rhs) + " violated"};
  }
  return {true, {}};
}

std::string emit_mip_start(const model& m, const solution_binding& b) {
  check_result chk = check_binding(m, b);
  if (!chk.ok) throw error("emit_mip_start", "infeasible start rejected: " + chk.first_violation);
  std::ostringstream os;
  for (const var& v : m.vars) os << v.name << " " << b.value_of(v.name) << "\n";
  return os.str();
}

}  // namespace mcm::milp
