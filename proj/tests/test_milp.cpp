#include <doctest.h>

#include "mcmopt/lp_parse.hpp"
#include "mcmopt/milp.hpp"

using namespace mcm;
using milp::lin_expr;
using milp::linearize;
using milp::model;
using milp::relation;
using milp::solution_binding;

TEST_CASE("big-M rewriting picks the tightest constant") {
  model m;
  milp::var_id x = m.integer("x", 0, 100);
  milp::var_id y = m.binary("y");
  milp::add_indicator(m, y, 1, lin_expr(x), relation::le, 5, linearize::big_m, "cap");
  REQUIRE(m.constraints.size() == 1);
  const milp::constraint& c = m.constraints[0];
  CHECK(c.from_big_m);
  // x <= 5 + 95 (1 - y), folded to x + 95 y <= 100
  CHECK(c.rhs == 100);
  i64 ycoef = 0;
  for (const milp::term& t : c.lhs.terms)
    if (t.v == y) ycoef = t.coef;
  CHECK(ycoef == 95);

  solution_binding b;
  b.values = {{"x", 100}, {"y", 0}};
  CHECK(milp::check_binding(m, b).ok);  // deactivated guard is vacuous
  b.values = {{"x", 6}, {"y", 1}};
  CHECK(!milp::check_binding(m, b).ok);
  b.values = {{"x", 5}, {"y", 1}};
  CHECK(milp::check_binding(m, b).ok);
}

TEST_CASE("big-M equality becomes two one-sided rows") {
  model m;
  milp::var_id x = m.integer("x", 0, 100);
  milp::var_id y = m.binary("y");
  milp::add_indicator(m, y, 1, lin_expr(x), relation::eq, 5, linearize::big_m, "pin");
  CHECK(m.constraints.size() == 2);
}

TEST_CASE("big-M rows are implied by bounds at the inactive guard value") {
  model m;
  milp::var_id x = m.integer("x", -7, 100);
  milp::var_id w = m.integer("w", 0, 13);
  milp::var_id y = m.binary("y");
  milp::var_id y0 = m.binary("y0");
  milp::add_indicator(m, y, 1, lin_expr(x).add(3, w), relation::eq, 11, linearize::big_m, "a");
  milp::add_indicator(m, y0, 0, lin_expr(2, x).add(-1, w), relation::ge, -3, linearize::big_m, "b");
  for (const milp::constraint& c : m.constraints) {
    REQUIRE(c.from_big_m);
    REQUIRE(c.big_m_from.has_value());
    // symbolically: with the guard at its inactive value the row's worst
    // case over the remaining bounds lands exactly on the rhs
    i64 worst = 0;
    for (const milp::term& t : c.lhs.terms) {
      if (t.v == c.big_m_from->guard) {
        worst += t.coef * (1 - c.big_m_from->active_when);
        continue;
      }
      const milp::var& v = m.vars[static_cast<std::size_t>(t.v)];
      worst += t.coef * (t.coef >= 0 ? v.upper : v.lower);
    }
    REQUIRE(worst == c.rhs);
  }
}

TEST_CASE("native indicators are kept as guard rows") {
  model m;
  milp::var_id x = m.integer("x", 0, 10);
  milp::var_id y = m.binary("y");
  milp::add_indicator(m, y, 1, lin_expr(x), relation::le, 5, linearize::native, "cap");
  REQUIRE(m.constraints.size() == 1);
  CHECK(m.constraints[0].ind.has_value());
  std::string lp = milp::emit_lp(m);
  CHECK(lp.find("y = 1 -> x <= 5") != std::string::npos);
}

TEST_CASE("one-hot table pins the selected value") {
  model m;
  std::vector<milp::var_id> sel = {m.binary("s0"), m.binary("s1"), m.binary("s2")};
  milp::var_id r = m.integer("r", 0, 100);
  milp::encode_one_hot_table(m, sel, {3, 6, 12}, r, linearize::big_m, "tab", true);
  solution_binding b;
  b.values = {{"s0", 0}, {"s1", 1}, {"s2", 0}, {"r", 6}};
  CHECK(milp::check_binding(m, b).ok);
  b.values["r"] = 12;
  CHECK(!milp::check_binding(m, b).ok);
  CHECK_THROWS_AS(milp::encode_one_hot_table(m, {}, {}, r, linearize::big_m, "bad", true), error);
}

TEST_CASE("encode_max pins the exact maximum") {
  model m;
  milp::var_id a = m.integer("a", 0, 10);
  milp::var_id b = m.integer("b", 0, 10);
  milp::var_id r = m.integer("r", 0, 20);
  milp::encode_max(m, r, {lin_expr(a), lin_expr(b)}, linearize::big_m, "mx");
  solution_binding s;
  s.values = {{"a", 3}, {"b", 7}, {"r", 7}, {"mx_pick0", 0}, {"mx_pick1", 1}};
  CHECK(milp::check_binding(m, s).ok);
  s.values["r"] = 8;  // above both operands: no pick can justify it
  s.values["mx_pick1"] = 1;
  CHECK(!milp::check_binding(m, s).ok);
  s.values["r"] = 6;  // below the max: the >= rows cut it
  CHECK(!milp::check_binding(m, s).ok);
}

TEST_CASE("encode_max of one operand degenerates to equality") {
  model m;
  milp::var_id a = m.integer("a", 0, 10);
  milp::var_id r = m.integer("r", 0, 10);
  milp::encode_max(m, r, {lin_expr(a)}, linearize::big_m, "mx");
  REQUIRE(m.constraints.size() == 1);
  CHECK(m.constraints[0].rel == relation::eq);
}

TEST_CASE("emit_lp is deterministic") {
  auto build = [] {
    model m;
    milp::var_id x = m.integer("x", -3, 12);
    milp::var_id y = m.binary("y");
    m.objective = lin_expr(x).add(2, y);
    m.add("r1", lin_expr(x).add(5, y), relation::le, 9);
    milp::add_indicator(m, y, 1, lin_expr(x), relation::ge, 2, linearize::big_m, "r2");
    m.metadata["note"] = "sample";
    return milp::emit_lp(m);
  };
  CHECK(build() == build());
}

TEST_CASE("emit_lp of a constraint-free model still carries all sections") {
  model m;
  m.integer("x", 0, 12);
  m.objective = lin_expr(m.lookup("x"));
  std::string lp = milp::emit_lp(m);
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("Bounds") != std::string::npos);
  CHECK(lp.find("0 <= x <= 12") != std::string::npos);
  CHECK(lp.find("Generals") != std::string::npos);
  CHECK(lp.rfind("End\n") == lp.size() - 4);
}

TEST_CASE("emit_lp then parse_lp is the identity on the constraint set") {
  model m;
  m.name = "roundtrip";
  milp::var_id x = m.integer("x", -4, 9);
  milp::var_id y = m.binary("y");
  milp::var_id z = m.integer("z", 0, 70);
  m.objective = lin_expr(3, x).add(1, z);
  m.add("plain", lin_expr(x).add(-2, z), relation::le, 7);
  m.add("eq", lin_expr(x).add(1, y).add(1, z), relation::eq, 3);
  milp::add_indicator(m, y, 1, lin_expr(z), relation::ge, 5, linearize::native, "nat");
  milp::add_indicator(m, y, 0, lin_expr(z).add(4, x), relation::le, 50, linearize::big_m, "bm");

  model p = milp::parse_lp(milp::emit_lp(m));
  REQUIRE(p.vars.size() == m.vars.size());
  for (std::size_t i = 0; i < m.vars.size(); ++i) {
    const milp::var& a = m.vars[i];
    milp::var_id pid = p.lookup(a.name);
    const milp::var& b = p.vars[static_cast<std::size_t>(pid)];
    CHECK(a.kind == b.kind);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
  }
  REQUIRE(p.constraints.size() == m.constraints.size());
  for (std::size_t i = 0; i < m.constraints.size(); ++i) {
    const milp::constraint& a = m.constraints[i];
    const milp::constraint& b = p.constraints[i];
    CHECK(a.name == b.name);
    CHECK(a.rel == b.rel);
    CHECK(a.rhs == b.rhs);
    CHECK(a.ind.has_value() == b.ind.has_value());
    // compare folded coefficient maps through each model's own names
    std::map<std::string, i64> fa, fb;
    for (const milp::term& t : a.lhs.terms)
      fa[m.vars[static_cast<std::size_t>(t.v)].name] += t.coef;
    for (const milp::term& t : b.lhs.terms)
      fb[p.vars[static_cast<std::size_t>(t.v)].name] += t.coef;
    CHECK(fa == fb);
  }
}

TEST_CASE("check_binding pinpoints the first violation") {
  model m;
  milp::var_id x = m.integer("x", 0, 10);
  milp::var_id y = m.integer("y", 0, 10);
  m.add("sum", lin_expr(x).add(1, y), relation::eq, 7);
  solution_binding b;
  b.values = {{"x", 3}, {"y", 4}};
  CHECK(milp::check_binding(m, b).ok);
  b.values["y"] = 5;
  milp::check_result r = milp::check_binding(m, b);
  CHECK(!r.ok);
  CHECK(r.first_violation.find("sum") != std::string::npos);
  b.values["y"] = 40;
  r = milp::check_binding(m, b);
  CHECK(!r.ok);
  CHECK(r.first_violation.find("outside") != std::string::npos);
  b.values.erase("y");
  r = milp::check_binding(m, b);
  CHECK(!r.ok);
  CHECK(r.first_violation.find("missing") != std::string::npos);
}

TEST_CASE("emit_mip_start verifies before writing") {
  model m;
  milp::var_id x = m.integer("x", 0, 10);
  m.add("pin", lin_expr(x), relation::eq, 4);
  solution_binding good;
  good.values = {{"x", 4}};
  CHECK(milp::emit_mip_start(m, good) == "x 4\n");
  solution_binding bad;
  bad.values = {{"x", 5}};
  CHECK_THROWS_WITH_AS(milp::emit_mip_start(m, bad), doctest::Contains("pin"), error);
  solution_binding empty;
  CHECK_THROWS_AS(milp::emit_mip_start(m, empty), error);
}

TEST_CASE("lp parser reports malformed input with a line") {
  CHECK_THROWS_WITH_AS(milp::parse_lp("Minimize\n obj: x\nSubject To\n r1: x ?? 3\nEnd\n"),
                       doctest::Contains("line 4"), error);
  CHECK_THROWS_WITH_AS(milp::parse_lp("Minimize\n obj: x\nSubject To\n r1: x <= 3\nEnd\n"),
                       doctest::Contains("no bounds"), error);
}
