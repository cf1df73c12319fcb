#include "mcmopt/numeric.hpp"

#include <algorithm>
#include <set>

namespace mcm {

odd_normalized normalize_constant(i64 c) {
  if (c == 0) throw error("normalize_constant", "zero constant has no odd fundamental");
  odd_normalized n;
  n.original = c;
  n.negated = c < 0;
  i64 v = n.negated ? -c : c;
  n.shift = trailing_zeros(v);
  n.odd = v >> n.shift;
  return n;
}

csd_form csd(i64 c) {
  if (c < 1 || c % 2 == 0) throw error("csd", "constant must be a positive odd integer");
  csd_form f;
  i64 v = c;
  while (v != 0) {
    if (v & 1) {
      int d = (v & 3) == 1 ? 1 : -1;
      f.digits.push_back(d);
      f.nonzero_count++;
      v -= d;
    } else {
      f.digits.push_back(0);
    }
    v >>= 1;
  }
  return f;
}

int ad_lower_bound(i64 c) {
  int nnz = csd(c).nonzero_count;
  return ceil_log2(nnz);
}

i64 adder_count_upper_bound(const std::vector<i64>& odd_targets) {
  std::set<i64> uniq;
  for (i64 t : odd_targets) {
    if (t < 1 || t % 2 == 0) throw error("adder_count_upper_bound", "targets must be positive odd");
    if (t != 1) uniq.insert(t);
  }
  i64 total = 0;
  for (i64 t : uniq) total += csd(t).nonzero_count - 1;
  return total;
}

}  // namespace mcm
