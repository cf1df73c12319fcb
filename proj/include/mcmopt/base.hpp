#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mcm {

using i64 = std::int64_t;
using i128 = __int128;

class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
  error(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what) {}
};

// index of the top set bit; v must be >= 1
inline int floor_log2(i64 v) {
  if (v < 1) throw error("floor_log2: argument must be positive");
  return 63 - __builtin_clzll(static_cast<unsigned long long>(v));
}

inline int ceil_log2(i64 v) {
  int f = floor_log2(v);
  return (v == (i64{1} << f)) ? f : f + 1;
}

inline i64 pow2(int e) {
  if (e < 0 || e > 62) throw error("pow2: exponent out of range");
  return i64{1} << e;
}

// zero all bits of weight < 2^t; v must be non-negative
inline i64 clear_below(i64 v, int t) {
  if (v < 0) throw error("clear_below: negative value");
  if (t <= 0) return v;
  if (t >= 63) return 0;
  return (v >> t) << t;
}

inline int trailing_zeros(i64 v) {
  if (v == 0) return 63;
  return __builtin_ctzll(static_cast<unsigned long long>(v));
}

}  // namespace mcm
