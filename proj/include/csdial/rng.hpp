#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace csdial {

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a master seed, a stream label and an
// item index. Used so that per-item generation is order-independent.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stream, std::uint64_t index);

// Seeded generator with platform-stable bounded draws. std::mt19937_64 output
// is fixed by the standard; the standard distributions are not, so bounded
// integers are drawn here by rejection.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform real in [0, 1) with 53 random bits.
  double unit();

 private:
  std::mt19937_64 engine_;
};

}  // namespace csdial
