// test-only helpers: independent oracles and a random-graph generator
#pragma once

#include <map>
#include <random>

#include "mcmopt/graph.hpp"

namespace mcm::testing {

// minimal number of nonzero signed digits over all radix-2 signed-digit
// representations; independent of the csd implementation
inline int min_signed_digits(i64 c, std::map<i64, int>& memo) {
  if (c == 0) return 0;
  auto it = memo.find(c);
  if (it != memo.end()) return it->second;
  memo[c] = 1 << 20;  // in-progress sentinel breaks the (c+1)/2 == c loop at 1
  int r;
  if (c % 2 == 0) {
    r = min_signed_digits(c / 2, memo);
  } else {
    r = 1 + std::min(min_signed_digits((c - 1) / 2, memo),
                     min_signed_digits((c + 1) / 2, memo));
  }
  memo[c] = r;
  return r;
}

inline int min_signed_digits(i64 c) {
  std::map<i64, int> memo;
  return min_signed_digits(c, memo);
}

struct graph_gen_options {
  int max_nodes = 5;
  int w_in = 8;
  bool with_truncations = false;
  int max_shift = 6;
};

inline adder_graph random_graph(std::mt19937_64& rng, const graph_gen_options& opt) {
  auto pick = [&rng](int lo, int hi) {
    return static_cast<int>(std::uniform_int_distribution<int>(lo, hi)(rng));
  };
  while (true) {
    adder_graph g = adder_graph::with_input(opt.w_in);
    int n = pick(1, opt.max_nodes);
    bool ok = true;
    for (int idx = 1; idx <= n && ok; ++idx) {
      bool placed = false;
      for (int attempt = 0; attempt < 40 && !placed; ++attempt) {
        adder_node nd;
        nd.index = idx;
        nd.left = pick(0, idx - 1);
        nd.right = pick(0, idx - 1);
        nd.left_shift = pick(0, opt.max_shift);
        int signs = pick(0, 2);  // ++, +-, -+
        nd.sign_left = signs == 2 ? sign_bit::minus : sign_bit::plus;
        nd.sign_right = signs == 1 ? sign_bit::minus : sign_bit::plus;
        i64 fl = g.fundamental_of(nd.left), fr = g.fundamental_of(nd.right);
        i64 raw = (nd.sign_left == sign_bit::minus ? -1 : 1) * (fl << nd.left_shift) +
                  (nd.sign_right == sign_bit::minus ? -1 : 1) * fr;
        if (raw <= 0) continue;
        nd.neg_shift = nd.left_shift == 0 ? trailing_zeros(raw) : 0;
        nd.fundamental = raw >> nd.neg_shift;
        if (nd.fundamental > (i64{1} << 28)) continue;
        if (opt.with_truncations) {
          std::vector<error_interval> eps = propagate_error(g);
          int hi_l = floor_log2(g.input_max * fl +
                                eps[static_cast<std::size_t>(nd.left)].eps_sup) +
                     nd.left_shift;
          int hi_r =
              floor_log2(g.input_max * fr + eps[static_cast<std::size_t>(nd.right)].eps_sup);
          if (pick(0, 1)) nd.trunc_left = pick(0, hi_l + 1);
          if (pick(0, 1)) nd.trunc_right = pick(0, hi_r + 1);
        }
        g.adders.push_back(nd);
        placed = true;
      }
      ok = placed;
    }
    if (!ok) continue;
    int outputs = pick(1, 2);
    for (int j = 0; j < outputs; ++j) {
      int node = pick(0, n);
      int post = pick(0, 2);
      bool neg = pick(0, 1) == 1;
      i64 f = g.fundamental_of(node);
      g.outputs.push_back({(neg ? -f : f) << post, node, post, neg});
    }
    if (validate(g).ok) return g;
  }
}

}  // namespace mcm::testing
