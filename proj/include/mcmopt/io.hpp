#pragma once

#include <string>

#include "mcmopt/graph.hpp"
#include "mcmopt/models.hpp"

namespace mcm::io {

// key = value instance document; unknown keys, duplicates and malformed
// integers are rejected with a line reference
models::instance parse_instance(const std::string& text);

// canonical emission: fixed key order, one key per line; emit(parse(d))
// is byte-stable
std::string emit_instance(const models::instance& inst);

std::string to_dot(const adder_graph& g);

// one line per node / output:
//   A(c; c_l,shift_l,sign_l; c_r,shift_r,sign_r; neg_shift; t_l,t_r; stage)
//   O(target; c; post_shift; negate)
// prefixed by a header carrying the input wordlength and bound
std::string to_exchange(const adder_graph& g);

adder_graph from_exchange(const std::string& text);

}  // namespace mcm::io
