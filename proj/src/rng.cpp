#include "evo/rng.hpp"

#include <random>

namespace evo {

double Rng::uniform() { return std::generate_canonical<double, 53>(*this); }

// A fresh distribution per draw keeps the generator the only state.
double Rng::normal() { return std::normal_distribution<double>{}(*this); }

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t c : coords) h = mix64(h ^ mix64(c + 0x632BE59BD9B4E019ULL));
  return h;
}

std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace evo
