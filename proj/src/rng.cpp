#include "prmix/rng.hpp"

#include <array>

namespace prmix {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t a = splitmix64(seed);
  std::uint64_t b = splitmix64(stream ^ 0xd1b54a32d192ed03ull);
  std::uint64_t c = splitmix64(a ^ b);
  std::array<std::uint32_t, 6> words{
      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

}  // namespace prmix
