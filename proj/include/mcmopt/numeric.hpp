#pragma once

#include <vector>

#include "mcmopt/base.hpp"

namespace mcm {

// c = (-1)^negated * odd * 2^shift with odd positive and odd
struct odd_normalized {
  i64 original = 0;
  i64 odd = 1;
  int shift = 0;
  bool negated = false;
};

// signed-digit radix-2 form, least significant digit first, no two
// adjacent nonzero digits
struct csd_form {
  std::vector<int> digits;
  int nonzero_count = 0;

  i64 value() const {
    i64 v = 0;
    for (std::size_t k = digits.size(); k-- > 0;) v = 2 * v + digits[k];
    return v;
  }
};

odd_normalized normalize_constant(i64 c);

// canonical signed digit recoding of a positive odd constant
csd_form csd(i64 c);

// valid lower bound on the adder depth of any graph producing c:
// an adder at depth d sums at most 2^d signed power-of-two terms
int ad_lower_bound(i64 c);

// number of adders of the per-constant CSD expansion; an adder graph
// with exactly this many adders always exists
i64 adder_count_upper_bound(const std::vector<i64>& odd_targets);

}  // namespace mcm
