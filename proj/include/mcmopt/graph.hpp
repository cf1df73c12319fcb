#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcmopt/base.hpp"
#include "mcmopt/numeric.hpp"

namespace mcm {

enum class sign_bit { plus, minus };

// one shift-and-add node; node reference 0 is the graph input (fundamental 1)
struct adder_node {
  int index = 0;  // >= 1, topological
  int left = 0;
  int right = 0;
  int left_shift = 0;              // s_{a,l} >= 0, applied to the left input
  int neg_shift = 0;               // magnitude of the right shift restoring oddness
  sign_bit sign_left = sign_bit::plus;
  sign_bit sign_right = sign_bit::plus;
  int trunc_left = 0;              // bit position in the adder's alignment, after the left shift
  int trunc_right = 0;
  i64 fundamental = 1;             // odd, >= 1
};

struct graph_output {
  i64 target = 1;        // original signed constant
  int node = 0;          // node whose fundamental equals normalize_constant(target).odd
  int post_shift = 0;
  bool post_negate = false;
};

struct adder_graph {
  int input_wordlength = 1;
  i64 input_max = 1;  // xbar; unsigned input x in [0, xbar]
  std::vector<adder_node> adders;  // adders[i].index == i + 1
  std::vector<graph_output> outputs;

  static adder_graph with_input(int w_in) {
    adder_graph g;
    g.input_wordlength = w_in;
    g.input_max = pow2(w_in) - 1;
    return g;
  }

  int node_count() const { return static_cast<int>(adders.size()) + 1; }

  i64 fundamental_of(int ref) const {
    if (ref == 0) return 1;
    return adders.at(static_cast<std::size_t>(ref) - 1).fundamental;
  }

  const adder_node& node(int ref) const { return adders.at(static_cast<std::size_t>(ref) - 1); }
};

// asymmetric deviation bounds in units of the node's LSB weight 2^0:
// exact - eps_inf <= computed <= exact + eps_sup
struct error_interval {
  i64 eps_inf = 0;
  i64 eps_sup = 0;
};

struct node_metrics {
  int msb = 0;            // index of the top bit of xbar*c + eps_sup
  int adder_depth = 0;
  i64 onebit_cost = 0;    // B_a = msb + 1 - gain - carry_msb
  i64 gain = 0;
  int carry_msb = 0;      // 1 when the top output bit needs no cell of its own
  int trailing_zeros = 0; // guaranteed-zero low bits of the computed value
};

struct violation {
  int node = 0;  // 0 for graph-level problems
  std::string rule;
  std::string detail;
};

struct validation_report {
  bool ok = true;
  std::vector<violation> violations;
  std::string to_string() const;
};

validation_report validate(const adder_graph& g);

// value(node) = fundamental * x, indexed by node reference (0 = input)
std::vector<i64> evaluate_exact(const adder_graph& g, i64 x);

struct sim_value {
  i64 approx = 0;
  i64 deviation = 0;  // approx - fundamental * x
};

// bit-accurate simulation of the truncated datapath (floor semantics)
std::vector<sim_value> simulate_truncated(const adder_graph& g, i64 x);

struct depth_info {
  std::vector<int> depth;  // by node reference
  int max_depth = 0;
};

depth_info adder_depth(const adder_graph& g);

int msb_of(int ref, const adder_graph& g, const error_interval* err = nullptr);

struct cost_breakdown {
  std::vector<i64> per_node;  // by node reference, per_node[0] == 0
  i64 total = 0;
};

// ground-truth ripple construction: scans output bit positions and counts
// the one-bit adder cells an HDL instantiation needs
cost_breakdown count_onebit_structural(const adder_graph& g);

struct metrics_result {
  std::vector<node_metrics> per_node;  // by node reference
  i64 total = 0;
};

// closed-form count B_a = msb + 1 - g - psi with the gain case analysis
metrics_result count_onebit_analytic(const adder_graph& g);

std::vector<error_interval> propagate_error(const adder_graph& g);

struct budget_line {
  std::size_t output_index = 0;
  i64 budget = 0;
  error_interval predicted;
  i64 margin_inf = 0;
  i64 margin_sup = 0;
  bool pass = true;
};

struct budget_report {
  bool ok = true;
  std::vector<budget_line> lines;
};

budget_report check_error_budget(const adder_graph& g, const std::vector<i64>& budgets);

// operand bit ranges used by both one-bit counters and the models
struct operand_span {
  int lo = 0;  // lowest possibly-nonzero position from structure (shift, truncation)
  int hi = 0;  // highest possibly-nonzero position from the value bound
  bool empty() const { return lo > hi; }
};

struct node_spans {
  operand_span left, right;
  int msb = 0;
};

node_spans spans_of(const adder_graph& g, const adder_node& n,
                    const std::vector<error_interval>& eps);

}  // namespace mcm
