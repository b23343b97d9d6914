#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace evo {

// SplitMix64 stream. State is a single word, so snapshots are trivial and
// child streams can be derived from any tuple of coordinates.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform();  // [0, 1)
  double normal();

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords);
std::uint64_t hash_string(std::string_view s);  // FNV-1a 64

}  // namespace evo
