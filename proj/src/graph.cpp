#include "mcmopt/graph.hpp"

#include <algorithm>
#include <sstream>

namespace mcm {

namespace {

i64 signed_value(sign_bit s, i64 v) { return s == sign_bit::minus ? -v : v; }

// largest value the node's full-precision product can take, including the
// positive deviation admitted by its error interval
i64 value_top(const adder_graph& g, int ref, const std::vector<error_interval>& eps) {
  return g.input_max * g.fundamental_of(ref) + eps[static_cast<std::size_t>(ref)].eps_sup;
}

}  // namespace

std::string validation_report::to_string() const {
  if (ok) return "ok";
  std::ostringstream os;
  for (const auto& v : violations)
    os << "node " << v.node << ": " << v.rule << " (" << v.detail << ")\n";
  return os.str();
}

validation_report validate(const adder_graph& g) {
  validation_report rep;
  auto fail = [&rep](int node, const std::string& rule, const std::string& detail) {
    rep.ok = false;
    rep.violations.push_back({node, rule, detail});
  };

  if (g.input_wordlength < 1) fail(0, "input wordlength", "must be >= 1");
  if (g.input_max < 1) fail(0, "input bound", "xbar must be >= 1");

  for (std::size_t i = 0; i < g.adders.size(); ++i) {
    const adder_node& n = g.adders[i];
    int idx = static_cast<int>(i) + 1;
    if (n.index != idx) fail(idx, "index order", "nodes must be stored in topological order");
    if (n.left < 0 || n.left >= idx || n.right < 0 || n.right >= idx) {
      fail(idx, "operand reference", "left/right must reference earlier nodes");
      continue;
    }
    if (n.left_shift < 0 || n.left_shift > 48) fail(idx, "left shift", "out of range");
    if (n.neg_shift < 0 || n.neg_shift > 48) fail(idx, "negative shift", "out of range");
    if (n.trunc_left < 0 || n.trunc_right < 0) fail(idx, "truncation", "must be non-negative");
    if (n.trunc_left > 60 || n.trunc_right > 60) fail(idx, "truncation", "out of range");
    if (n.sign_left == sign_bit::minus && n.sign_right == sign_bit::minus)
      fail(idx, "signs", "both operands negated");
    if (n.neg_shift > 0 && n.left_shift != 0)
      fail(idx, "shift combination", "negative shift requires left shift 0");
    if (n.fundamental < 1) fail(idx, "fundamental positive", "must be >= 1");
    if (n.fundamental % 2 == 0) fail(idx, "fundamental not odd", "must be odd");

    i64 fl = g.fundamental_of(n.left);
    i64 fr = g.fundamental_of(n.right);
    if (n.left_shift <= 48 && n.neg_shift <= 48) {
      i64 lhs = signed_value(n.sign_left, fl << n.left_shift) + signed_value(n.sign_right, fr);
      if (lhs != n.fundamental << n.neg_shift) {
        std::ostringstream os;
        os << "2^" << n.neg_shift << " * " << n.fundamental << " != "
           << (n.sign_left == sign_bit::minus ? "-" : "") << "2^" << n.left_shift << "*" << fl
           << (n.sign_right == sign_bit::minus ? " - " : " + ") << fr;
        fail(idx, "adder relation", os.str());
      }
    }
    if (g.input_max > (i64{1} << 50) / std::max<i64>(n.fundamental, 1))
      fail(idx, "value range", "xbar * fundamental exceeds the supported range");
    i64 shifted_left = n.left_shift <= 48 ? fl << n.left_shift : i64{1} << 60;
    i64 shifted_out = n.neg_shift <= 48 ? n.fundamental << n.neg_shift : i64{1} << 60;
    if (g.input_max > (i64{1} << 58) / std::max<i64>(std::max(shifted_left, shifted_out), 1))
      fail(idx, "value range", "a shifted operand exceeds the supported range");
  }

  for (std::size_t j = 0; j < g.outputs.size(); ++j) {
    const graph_output& o = g.outputs[j];
    if (o.node < 0 || o.node >= g.node_count()) {
      fail(0, "output reference", "output " + std::to_string(j) + " references a missing node");
      continue;
    }
    if (o.target == 0) {
      fail(0, "output target", "zero target");
      continue;
    }
    odd_normalized nz = normalize_constant(o.target);
    if (nz.odd != g.fundamental_of(o.node))
      fail(o.node, "output fundamental",
           "target " + std::to_string(o.target) + " does not match fundamental " +
               std::to_string(g.fundamental_of(o.node)));
    if (nz.shift != o.post_shift || nz.negated != o.post_negate)
      fail(o.node, "output wiring",
           "post shift/negate inconsistent with target " + std::to_string(o.target));
  }
  return rep;
}

std::vector<i64> evaluate_exact(const adder_graph& g, i64 x) {
  if (x < 0 || x > g.input_max)
    throw error("evaluate_exact", "x out of [0, " + std::to_string(g.input_max) + "]");
  std::vector<i64> v(static_cast<std::size_t>(g.node_count()));
  v[0] = x;
  for (const adder_node& n : g.adders)
    v[static_cast<std::size_t>(n.index)] = n.fundamental * x;
  return v;
}

std::vector<sim_value> simulate_truncated(const adder_graph& g, i64 x) {
  if (x < 0 || x > g.input_max)
    throw error("simulate_truncated", "x out of [0, " + std::to_string(g.input_max) + "]");
  std::vector<sim_value> out(static_cast<std::size_t>(g.node_count()));
  std::vector<i64> approx(static_cast<std::size_t>(g.node_count()));
  approx[0] = x;
  out[0] = {x, 0};
  for (const adder_node& n : g.adders) {
    i64 left_raw = approx[static_cast<std::size_t>(n.left)];
    if (n.left_shift > 0 && left_raw > ((i64{1} << 61) >> n.left_shift))
      throw error("simulate_truncated", "datapath value exceeds the supported range");
    i64 lt = clear_below(left_raw << n.left_shift, n.trunc_left);
    i64 rt = clear_below(approx[static_cast<std::size_t>(n.right)], n.trunc_right);
    i64 sum = signed_value(n.sign_left, lt) + signed_value(n.sign_right, rt);
    if (sum < 0)
      throw error("simulate_truncated",
                  "negative datapath at node " + std::to_string(n.index) + " for x = " +
                      std::to_string(x));
    i64 a = sum >> n.neg_shift;
    approx[static_cast<std::size_t>(n.index)] = a;
    out[static_cast<std::size_t>(n.index)] = {a, a - n.fundamental * x};
  }
  return out;
}

depth_info adder_depth(const adder_graph& g) {
  depth_info d;
  d.depth.assign(static_cast<std::size_t>(g.node_count()), 0);
  for (const adder_node& n : g.adders) {
    int dep = std::max(d.depth[static_cast<std::size_t>(n.left)],
                       d.depth[static_cast<std::size_t>(n.right)]) +
              1;
    d.depth[static_cast<std::size_t>(n.index)] = dep;
    d.max_depth = std::max(d.max_depth, dep);
  }
  return d;
}

int msb_of(int ref, const adder_graph& g, const error_interval* err) {
  i64 top = g.input_max * g.fundamental_of(ref) + (err ? err->eps_sup : 0);
  return floor_log2(top);
}

std::vector<error_interval> propagate_error(const adder_graph& g) {
  std::size_t nc = static_cast<std::size_t>(g.node_count());
  std::vector<error_interval> eps(nc);
  std::vector<int> zeros(nc, 0);
  for (const adder_node& n : g.adders) {
    const error_interval& el = eps[static_cast<std::size_t>(n.left)];
    const error_interval& er = eps[static_cast<std::size_t>(n.right)];
    int ql = zeros[static_cast<std::size_t>(n.left)] + n.left_shift;
    int qr = zeros[static_cast<std::size_t>(n.right)];
    i64 et_l = std::max<i64>(pow2(std::min(n.trunc_left, 62)) - pow2(std::min(ql, 62)), 0);
    i64 et_r = std::max<i64>(pow2(std::min(n.trunc_right, 62)) - pow2(std::min(qr, 62)), 0);

    // operand interval after shift and truncation; a minus sign swaps it
    i128 l_inf = (static_cast<i128>(el.eps_inf) << n.left_shift) + et_l;
    i128 l_sup = static_cast<i128>(el.eps_sup) << n.left_shift;
    if (n.sign_left == sign_bit::minus) std::swap(l_inf, l_sup);
    i128 r_inf = static_cast<i128>(er.eps_inf) + et_r;
    i128 r_sup = er.eps_sup;
    if (n.sign_right == sign_bit::minus) std::swap(r_inf, r_sup);

    // the interval is not rescaled across the negative shift (conservative)
    i128 inf = l_inf + r_inf, sup = l_sup + r_sup;
    if (inf > (i128{1} << 60) || sup > (i128{1} << 60))
      throw error("propagate_error",
                  "error bounds exceed the supported range at node " + std::to_string(n.index));
    eps[static_cast<std::size_t>(n.index)] = {static_cast<i64>(inf), static_cast<i64>(sup)};

    int low_l = std::max(ql, n.trunc_left);
    int low_r = std::max(qr, n.trunc_right);
    zeros[static_cast<std::size_t>(n.index)] = std::max(std::min(low_l, low_r) - n.neg_shift, 0);
  }
  return eps;
}

node_spans spans_of(const adder_graph& g, const adder_node& n,
                    const std::vector<error_interval>& eps) {
  node_spans s;
  s.left.lo = std::max(n.left_shift, n.trunc_left);
  s.left.hi = floor_log2(value_top(g, n.left, eps)) + n.left_shift;
  s.right.lo = n.trunc_right;
  s.right.hi = floor_log2(value_top(g, n.right, eps));
  s.msb = floor_log2(value_top(g, n.index, eps));
  return s;
}

cost_breakdown count_onebit_structural(const adder_graph& g) {
  cost_breakdown cb;
  cb.per_node.assign(static_cast<std::size_t>(g.node_count()), 0);
  std::vector<error_interval> eps = propagate_error(g);
  for (const adder_node& n : g.adders) {
    node_spans sp = spans_of(g, n, eps);
    i64 cells = 0;
    if (n.sign_left == sign_bit::plus && n.sign_right == sign_bit::plus) {
      // ripple adder: walk the output positions tracking carry feasibility
      bool carry = false;
      for (int p = 0; p <= sp.msb; ++p) {
        int ops = 0;
        if (p >= sp.left.lo && p <= sp.left.hi) ops++;
        if (p >= sp.right.lo && p <= sp.right.hi) ops++;
        if (ops + (carry ? 1 : 0) >= 2) {
          cells++;
          carry = true;
        } else if (ops == 0) {
          carry = false;  // a lone carry wire is the output bit itself
        }
      }
    } else {
      // borrow/increment chain from the subtrahend's lowest live position to
      // the output msb; gaps are not credited (the chain is instantiated whole)
      int lo_s = n.sign_left == sign_bit::minus ? sp.left.lo : sp.right.lo;
      for (int p = lo_s; p <= sp.msb; ++p) cells++;
    }
    cb.per_node[static_cast<std::size_t>(n.index)] = cells;
    cb.total += cells;
  }
  return cb;
}

metrics_result count_onebit_analytic(const adder_graph& g) {
  metrics_result mr;
  mr.per_node.assign(static_cast<std::size_t>(g.node_count()), node_metrics{});
  std::vector<error_interval> eps = propagate_error(g);
  depth_info d = adder_depth(g);

  // recompute trailing zeros alongside (propagate_error keeps them internal)
  std::vector<int> zeros(static_cast<std::size_t>(g.node_count()), 0);
  for (const adder_node& n : g.adders) {
    int ql = zeros[static_cast<std::size_t>(n.left)] + n.left_shift;
    int qr = zeros[static_cast<std::size_t>(n.right)];
    zeros[static_cast<std::size_t>(n.index)] =
        std::max(std::min(std::max(ql, n.trunc_left), std::max(qr, n.trunc_right)) - n.neg_shift, 0);
  }

  mr.per_node[0].msb = msb_of(0, g);
  for (const adder_node& n : g.adders) {
    node_spans sp = spans_of(g, n, eps);
    node_metrics m;
    m.msb = sp.msb;
    m.adder_depth = d.depth[static_cast<std::size_t>(n.index)];
    m.trailing_zeros = zeros[static_cast<std::size_t>(n.index)];

    bool both_plus = n.sign_left == sign_bit::plus && n.sign_right == sign_bit::plus;
    if (both_plus) {
      bool disjoint = sp.left.empty() || sp.right.empty() || sp.left.lo > sp.right.hi ||
                      sp.right.lo > sp.left.hi;
      if (disjoint) {
        // no position receives two bits: pure wiring, the msb comes for free
        m.gain = m.msb;
        m.carry_msb = 1;
      } else {
        m.gain = std::max({n.trunc_left, n.left_shift, n.trunc_right});
        m.carry_msb = m.msb > std::max(sp.left.hi, sp.right.hi) ? 1 : 0;
      }
    } else {
      i64 raw = n.sign_left == sign_bit::minus ? std::max(n.trunc_left, n.left_shift)
                                               : n.trunc_right;
      m.gain = std::min<i64>(raw, m.msb + 1);
      m.carry_msb = 0;
    }
    m.onebit_cost = m.msb + 1 - m.gain - m.carry_msb;
    mr.per_node[static_cast<std::size_t>(n.index)] = m;
    mr.total += m.onebit_cost;
  }
  return mr;
}

budget_report check_error_budget(const adder_graph& g, const std::vector<i64>& budgets) {
  if (budgets.size() != g.outputs.size())
    throw error("check_error_budget", "one budget per output required");
  budget_report rep;
  std::vector<error_interval> eps = propagate_error(g);
  for (std::size_t j = 0; j < g.outputs.size(); ++j) {
    budget_line line;
    line.output_index = j;
    line.budget = budgets[j];
    line.predicted = eps[static_cast<std::size_t>(g.outputs[j].node)];
    line.margin_inf = line.budget - line.predicted.eps_inf;
    line.margin_sup = line.budget - line.predicted.eps_sup;
    line.pass = line.margin_inf >= 0 && line.margin_sup >= 0;
    rep.ok = rep.ok && line.pass;
    rep.lines.push_back(line);
  }
  return rep;
}

}  // namespace mcm
