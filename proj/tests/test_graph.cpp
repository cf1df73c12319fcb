#include <doctest.h>

#include <random>

#include "mcmopt/graph.hpp"
#include "oracles.hpp"

using namespace mcm;

namespace {

adder_node make_node(int index, int left, int right, int lshift, sign_bit sl, sign_bit sr,
                     int nshift, i64 fund, int tl = 0, int tr = 0) {
  adder_node n;
  n.index = index;
  n.left = left;
  n.right = right;
  n.left_shift = lshift;
  n.sign_left = sl;
  n.sign_right = sr;
  n.neg_shift = nshift;
  n.fundamental = fund;
  n.trunc_left = tl;
  n.trunc_right = tr;
  return n;
}

// the depth-3 chain for {1, 7, 49, 51}: 7 = 8-1, 49 = 8*7-7, 51 = 49 + 2
adder_graph chain_graph(int w_in) {
  adder_graph g = adder_graph::with_input(w_in);
  g.adders.push_back(make_node(1, 0, 0, 3, sign_bit::plus, sign_bit::minus, 0, 7));
  g.adders.push_back(make_node(2, 1, 1, 3, sign_bit::plus, sign_bit::minus, 0, 49));
  g.adders.push_back(make_node(3, 0, 2, 1, sign_bit::plus, sign_bit::plus, 0, 51));
  g.outputs.push_back({49, 2, 0, false});
  g.outputs.push_back({51, 3, 0, false});
  return g;
}

// the depth-2 topology: 3 = 4-1, 49 = 16*3 + 1, 51 = 16*3 + 3
adder_graph flat_graph(int w_in) {
  adder_graph g = adder_graph::with_input(w_in);
  g.adders.push_back(make_node(1, 0, 0, 2, sign_bit::plus, sign_bit::minus, 0, 3));
  g.adders.push_back(make_node(2, 1, 0, 4, sign_bit::plus, sign_bit::plus, 0, 49));
  g.adders.push_back(make_node(3, 1, 1, 4, sign_bit::plus, sign_bit::plus, 0, 51));
  g.outputs.push_back({49, 2, 0, false});
  g.outputs.push_back({51, 3, 0, false});
  return g;
}

adder_graph single_node(int w_in, adder_node n, bool with_output = true) {
  adder_graph g = adder_graph::with_input(w_in);
  g.adders.push_back(n);
  if (with_output) g.outputs.push_back({n.fundamental, n.index, 0, false});
  return g;
}

}  // namespace

TEST_CASE("validate accepts the known-good topologies") {
  CHECK(validate(chain_graph(3)).ok);
  CHECK(validate(flat_graph(3)).ok);

  // 19 = (7 + 31) >> 1, both signs plus
  adder_graph g = adder_graph::with_input(4);
  g.adders.push_back(make_node(1, 0, 0, 3, sign_bit::plus, sign_bit::minus, 0, 7));
  g.adders.push_back(make_node(2, 0, 0, 5, sign_bit::plus, sign_bit::minus, 0, 31));
  g.adders.push_back(make_node(3, 1, 2, 0, sign_bit::plus, sign_bit::plus, 1, 19));
  g.outputs.push_back({19, 3, 0, false});
  CHECK(validate(g).ok);
}

TEST_CASE("validate flags broken nodes") {
  adder_graph g = adder_graph::with_input(3);
  g.adders.push_back(make_node(1, 0, 0, 1, sign_bit::plus, sign_bit::plus, 0, 6));  // 2x + x = 3x
  validation_report rep = validate(g);
  CHECK(!rep.ok);
  bool parity = false, relation = false;
  for (const violation& v : rep.violations) {
    parity |= v.rule == "fundamental not odd";
    relation |= v.rule == "adder relation";
  }
  CHECK(parity);
  CHECK(relation);

  adder_graph g2 = adder_graph::with_input(3);
  g2.adders.push_back(make_node(1, 0, 0, 1, sign_bit::plus, sign_bit::plus, 1, 3));
  rep = validate(g2);
  CHECK(!rep.ok);  // neg shift with left shift
}

TEST_CASE("validate checks the output wiring") {
  adder_graph g = adder_graph::with_input(3);
  g.adders.push_back(make_node(1, 0, 0, 3, sign_bit::plus, sign_bit::minus, 0, 7));
  g.outputs.push_back({28, 1, 2, false});
  CHECK(validate(g).ok);
  g.outputs[0].post_shift = 1;  // 28 = 7 << 2, not << 1
  CHECK(!validate(g).ok);
  g.outputs[0] = {9, 1, 0, false};
  CHECK(!validate(g).ok);
}

TEST_CASE("evaluate_exact") {
  adder_graph g = adder_graph::with_input(4);
  g.adders.push_back(make_node(1, 0, 0, 3, sign_bit::plus, sign_bit::minus, 0, 7));
  g.adders.push_back(make_node(2, 0, 0, 5, sign_bit::plus, sign_bit::minus, 0, 31));
  g.adders.push_back(make_node(3, 1, 2, 0, sign_bit::plus, sign_bit::plus, 1, 19));

  std::vector<i64> v = evaluate_exact(g, 0);
  CHECK(v == std::vector<i64>{0, 0, 0, 0});
  v = evaluate_exact(g, 1);
  CHECK(v == std::vector<i64>{1, 7, 31, 19});
  v = evaluate_exact(g, 13);
  CHECK(v[3] == 19 * 13);
  CHECK_THROWS_AS(evaluate_exact(g, 16), error);
  CHECK_THROWS_AS(evaluate_exact(g, -1), error);
}

TEST_CASE("simulate_truncated matches the sign-flip example") {
  // 7x = 8x - x with the subtrahend truncated at bit 1
  adder_graph g = single_node(3, make_node(1, 0, 0, 3, sign_bit::plus, sign_bit::minus, 0, 7, 0, 1));
  std::vector<sim_value> s = simulate_truncated(g, 1);
  CHECK(s[1].approx == 8);  // 8 - clear_below(1, 1) = 8 - 0
  CHECK(s[1].deviation == 1);
}

TEST_CASE("simulate_truncated rejects negative intermediate values") {
  // 15x = 16x - x with the minuend cleared below bit 5: x = 1 gives 0 - 1
  adder_graph g = single_node(3, make_node(1, 0, 0, 4, sign_bit::plus, sign_bit::minus, 0, 15, 5, 0));
  CHECK_THROWS_WITH_AS(simulate_truncated(g, 1), doctest::Contains("negative datapath"), error);
}

TEST_CASE("simulate_truncated equals evaluate_exact without truncations") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    testing::graph_gen_options opt;
    opt.w_in = 1 + static_cast<int>(rng() % 10);
    opt.with_truncations = false;
    adder_graph g = testing::random_graph(rng, opt);
    for (i64 x = 0; x <= g.input_max; ++x) {
      std::vector<i64> exact = evaluate_exact(g, x);
      std::vector<sim_value> sim = simulate_truncated(g, x);
      for (std::size_t k = 0; k < exact.size(); ++k) {
        REQUIRE(sim[k].approx == exact[k]);
        REQUIRE(sim[k].deviation == 0);
      }
    }
  }
}

TEST_CASE("adder_depth") {
  CHECK(adder_depth(chain_graph(3)).max_depth == 3);
  CHECK(adder_depth(flat_graph(3)).max_depth == 2);
  adder_graph g = adder_graph::with_input(3);
  CHECK(adder_depth(g).max_depth == 0);
}

TEST_CASE("msb_of") {
  adder_graph g = adder_graph::with_input(3);
  g.adders.push_back(make_node(1, 0, 0, 3, sign_bit::plus, sign_bit::minus, 0, 7));
  g.adders.push_back(make_node(2, 1, 1, 3, sign_bit::plus, sign_bit::minus, 0, 49));
  CHECK(msb_of(0, g) == 2);   // xbar = 7 fits bits 0..2
  CHECK(msb_of(2, g) == 8);   // floor(log2(343))
  adder_graph g1 = adder_graph::with_input(1);
  CHECK(msb_of(0, g1) == 0);
  error_interval err{0, 9};
  CHECK(msb_of(0, g1, &err) == 3);  // 1 + 9 = 10, top bit 3
}

TEST_CASE("structural one-bit counts of canonical single-adder shapes") {
  // 8x - x: borrow chain over bits 0..5
  adder_graph g = single_node(3, make_node(1, 0, 0, 3, sign_bit::plus, sign_bit::minus, 0, 7));
  CHECK(count_onebit_structural(g).total == 6);

  // 16x + x: disjoint operands, no cells at all
  g = single_node(3, make_node(1, 0, 0, 4, sign_bit::plus, sign_bit::plus, 0, 17));
  CHECK(count_onebit_structural(g).total == 0);

  // 2x + x: cells at bits 1..3, bit 4 is the free carry-out, bit 0 wired
  g = single_node(3, make_node(1, 0, 0, 1, sign_bit::plus, sign_bit::plus, 0, 3));
  CHECK(count_onebit_structural(g).total == 3);
}

TEST_CASE("analytic one-bit metrics on the same shapes") {
  adder_graph g = single_node(3, make_node(1, 0, 0, 4, sign_bit::plus, sign_bit::plus, 0, 17));
  metrics_result mr = count_onebit_analytic(g);
  CHECK(mr.per_node[1].onebit_cost == 0);
  CHECK(mr.per_node[1].gain == mr.per_node[1].msb);  // no-overlap case
  CHECK(mr.per_node[1].carry_msb == 1);

  g = single_node(3, make_node(1, 0, 0, 3, sign_bit::plus, sign_bit::minus, 0, 7));
  mr = count_onebit_analytic(g);
  CHECK(mr.per_node[1].gain == 0);
  CHECK(mr.per_node[1].onebit_cost == 6);
  CHECK(mr.total == count_onebit_structural(g).total);

  // addition with both operands truncated at t = 1: gain max(1, 1, 1) = 1
  g = single_node(3, make_node(1, 0, 0, 1, sign_bit::plus, sign_bit::plus, 0, 3, 1, 1));
  mr = count_onebit_analytic(g);
  CHECK(mr.per_node[1].gain == 1);
}

TEST_CASE("error propagation basics") {
  adder_graph g = flat_graph(3);
  std::vector<error_interval> eps = propagate_error(g);
  for (const error_interval& e : eps) {
    CHECK(e.eps_inf == 0);
    CHECK(e.eps_sup == 0);
  }

  // addition, right operand truncated at t = 2 with no trailing zeros:
  // contributes (3, 0) per the all-ones worst case
  adder_graph g1 = single_node(3, make_node(1, 0, 0, 2, sign_bit::plus, sign_bit::plus, 0, 5, 0, 2));
  eps = propagate_error(g1);
  CHECK(eps[1].eps_inf == 3);
  CHECK(eps[1].eps_sup == 0);
}

TEST_CASE("truncating guaranteed zeros is free") {
  // 5x = 4x + x, then 20x + x: the second adder's left operand arrives
  // shifted by two, so clearing its two zero low bits costs nothing
  adder_graph g = adder_graph::with_input(3);
  g.adders.push_back(make_node(1, 0, 0, 2, sign_bit::plus, sign_bit::plus, 0, 5));
  g.adders.push_back(make_node(2, 1, 0, 2, sign_bit::plus, sign_bit::plus, 0, 21, 2, 0));
  g.outputs.push_back({21, 2, 0, false});
  REQUIRE(validate(g).ok);
  std::vector<error_interval> eps = propagate_error(g);
  CHECK(eps[2].eps_inf == 0);
  CHECK(eps[2].eps_sup == 0);
}

TEST_CASE("negation swaps the operand's deviation bounds exactly") {
  // n1 = 4x + trunc(x, 2) carries interval (3, 0); adding vs subtracting n1
  // downstream swaps its contribution
  adder_graph plus = adder_graph::with_input(3);
  plus.adders.push_back(make_node(1, 0, 0, 2, sign_bit::plus, sign_bit::plus, 0, 5, 0, 2));
  plus.adders.push_back(make_node(2, 0, 1, 4, sign_bit::plus, sign_bit::plus, 0, 21));
  REQUIRE(validate(plus).ok);
  adder_graph minus = plus;
  minus.adders[1].sign_right = sign_bit::minus;
  minus.adders[1].fundamental = 11;
  REQUIRE(validate(minus).ok);
  std::vector<error_interval> ep = propagate_error(plus);
  std::vector<error_interval> em = propagate_error(minus);
  CHECK(ep[2].eps_inf == em[2].eps_sup);
  CHECK(ep[2].eps_sup == em[2].eps_inf);
  CHECK(ep[2].eps_inf == 3);
}

TEST_CASE("the truncated via-17 topology for {49,51} stays within half an ulp") {
  // 17 = 16x + x, 49 = 32x + 17x, 51 = 2*17x + 17x, with truncations chosen
  // to fit the half-ulp budget of a 3-bit result (32 LSBs of the product)
  adder_graph g = adder_graph::with_input(3);
  g.adders.push_back(make_node(1, 0, 0, 4, sign_bit::plus, sign_bit::plus, 0, 17));
  g.adders.push_back(make_node(2, 0, 1, 5, sign_bit::plus, sign_bit::plus, 0, 49, 6, 0));
  g.adders.push_back(make_node(3, 1, 1, 1, sign_bit::plus, sign_bit::plus, 0, 51, 5, 1));
  g.outputs.push_back({49, 2, 0, false});
  g.outputs.push_back({51, 3, 0, false});
  REQUIRE(validate(g).ok);

  budget_report rep = check_error_budget(g, {32, 32});
  CHECK(rep.ok);
  std::vector<error_interval> eps = propagate_error(g);
  for (i64 x = 0; x <= 7; ++x) {
    std::vector<sim_value> sim = simulate_truncated(g, x);
    for (const graph_output& o : g.outputs) {
      i64 dev = sim[static_cast<std::size_t>(o.node)].deviation;
      REQUIRE(dev >= -32);
      REQUIRE(dev <= 32);
      REQUIRE(dev >= -eps[static_cast<std::size_t>(o.node)].eps_inf);
      REQUIRE(dev <= eps[static_cast<std::size_t>(o.node)].eps_sup);
    }
  }
}

TEST_CASE("check_error_budget") {
  adder_graph g = flat_graph(3);
  budget_report rep = check_error_budget(g, {10, 10});
  CHECK(rep.ok);
  CHECK(rep.lines[0].margin_inf == 10);

  // single truncation t = 3 with z = 0: bound 7 exceeds budget 6
  adder_graph g1 = single_node(3, make_node(1, 0, 0, 3, sign_bit::plus, sign_bit::plus, 0, 9, 0, 3));
  rep = check_error_budget(g1, {6});
  CHECK(!rep.ok);
  CHECK(rep.lines[0].predicted.eps_inf == 7);
  rep = check_error_budget(g1, {7});
  CHECK(rep.ok);
}

TEST_CASE("extreme shifts and truncations are rejected, not miscomputed") {
  // within validation limits but beyond the arithmetic range the analyses
  // support: the error propagation must refuse rather than wrap around
  adder_graph g = adder_graph::with_input(4);
  g.adders.push_back(make_node(1, 0, 0, 1, sign_bit::plus, sign_bit::plus, 0, 3, 0, 55));
  g.adders.push_back(make_node(2, 1, 1, 10, sign_bit::plus, sign_bit::plus, 0, 3075, 0, 0));
  REQUIRE(validate(g).ok);
  CHECK_THROWS_WITH_AS(propagate_error(g), doctest::Contains("range"), error);

  // a graph whose shifted operand cannot be represented at all
  adder_graph g2 = adder_graph::with_input(16);
  g2.adders.push_back(make_node(1, 0, 0, 45, sign_bit::plus, sign_bit::plus, 0,
                                (i64{1} << 45) + 1));
  CHECK(!validate(g2).ok);
}

TEST_CASE("interval soundness on random truncated graphs") {
  std::mt19937_64 rng(4);
  int done = 0;
  while (done < 250) {
    testing::graph_gen_options opt;
    opt.w_in = 1 + static_cast<int>(rng() % 8);
    opt.with_truncations = true;
    adder_graph g = testing::random_graph(rng, opt);
    std::vector<error_interval> eps = propagate_error(g);
    try {
      for (i64 x = 0; x <= g.input_max; ++x) {
        std::vector<sim_value> sim = simulate_truncated(g, x);
        for (std::size_t k = 0; k < sim.size(); ++k) {
          REQUIRE(sim[k].deviation >= -eps[k].eps_inf);
          REQUIRE(sim[k].deviation <= eps[k].eps_sup);
        }
      }
    } catch (const error&) {
      continue;  // negative datapath: outside the positive-quantity analysis
    }
    done++;
  }
}

TEST_CASE("cost counters agree on random graphs") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    testing::graph_gen_options opt;
    opt.w_in = 1 + static_cast<int>(rng() % 8);
    opt.with_truncations = (i % 2) == 1;
    adder_graph g = testing::random_graph(rng, opt);
    metrics_result an = count_onebit_analytic(g);
    cost_breakdown st = count_onebit_structural(g);
    REQUIRE(an.total == st.total);
    for (std::size_t k = 0; k < an.per_node.size(); ++k)
      REQUIRE(an.per_node[k].onebit_cost == st.per_node[k]);
  }
}

TEST_CASE("depth respects the csd lower bound on random graphs") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    testing::graph_gen_options opt;
    opt.w_in = 4;
    adder_graph g = testing::random_graph(rng, opt);
    depth_info d = adder_depth(g);
    for (const adder_node& n : g.adders)
      REQUIRE(d.depth[static_cast<std::size_t>(n.index)] >= ad_lower_bound(n.fundamental));
  }
}

TEST_CASE("msb consistency with simulated maxima") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    testing::graph_gen_options opt;
    opt.w_in = 1 + static_cast<int>(rng() % 8);
    adder_graph g = testing::random_graph(rng, opt);
    std::vector<i64> top(static_cast<std::size_t>(g.node_count()), 0);
    for (i64 x = 0; x <= g.input_max; ++x) {
      std::vector<i64> v = evaluate_exact(g, x);
      for (std::size_t k = 0; k < v.size(); ++k) top[k] = std::max(top[k], v[k]);
    }
    for (int k = 0; k < g.node_count(); ++k) {
      int m = msb_of(k, g);
      REQUIRE(pow2(m + 1) > top[static_cast<std::size_t>(k)]);
      REQUIRE(top[static_cast<std::size_t>(k)] >= pow2(m));
    }
  }
}
