// Deterministic RNG with save/restore, used for weight init and batch
// sampling. Draws only through the fixed mappings below so that streams are
// reproducible across runs and across checkpoint round trips.
#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "tfgan/common.hpp"

namespace tfgan {

class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of randomness.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). Multiply-shift; bias is < 2^-64.
  uint64_t uniform_index(uint64_t bound) {
    check(bound > 0, "Rng::uniform_index: bound must be positive");
    const unsigned __int128 m =
        static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(bound);
    return static_cast<uint64_t>(m >> 64);
  }

  // mt19937_64 stream serialization is stable for a given libstdc++; the
  // checkpoint contract is same-platform bit-exact resume.
  std::string save_state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void load_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
    check_rt(!is.fail(), "Rng::load_state: malformed engine state");
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tfgan
