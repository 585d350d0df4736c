// Shared small utilities: shapes, error checking, index math.
#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfgan {

using Shape = std::vector<int64_t>;

inline int64_t numel_of(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) os << s[i] << (i + 1 < s.size() ? "," : "");
  os << ")";
  return os.str();
}

// Precondition failure: bad arguments, shape mismatches, invalid config.
class ValueError : public std::invalid_argument {
 public:
  explicit ValueError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Runtime failure: I/O errors, corrupt files, non-finite losses.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void check(bool ok, const std::string& msg) {
  if (!ok) throw ValueError(msg);
}

inline void check_rt(bool ok, const std::string& msg) {
  if (!ok) throw RuntimeError(msg);
}

// Mirror (billiard) index: maps any integer onto [0, n) by repeated
// boundary reflection without repeating edge samples. n == 1 maps to 0.
inline int64_t mirror_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  int64_t j = i % period;
  if (j < 0) j += period;
  return j < n ? j : period - j;
}

}  // namespace tfgan
