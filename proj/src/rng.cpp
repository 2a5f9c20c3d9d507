#include "csdial/rng.hpp"

#include <limits>

#include "csdial/text.hpp"

namespace csdial {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stream, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed ^ text::fnv1a64(stream)) + index);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  const auto max = std::numeric_limits<std::uint64_t>::max();
  const auto limit = max - (max % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double Rng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

}  // namespace csdial
