#pragma once

#include <cstdint>
#include <random>

namespace prmix {

// std::mt19937_64 whose seed sequence is derived from SplitMix64(seed) and
// SplitMix64(stream). Replica r of an experiment with master seed s uses
// Rng(s, r); sub-tasks inside a replica use distinct stream tags so that no
// two consumers share state. Deterministic for a given standard library.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  int sign() { return (engine_() >> 63) ? 1 : -1; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Mixes a tag into a stream index so sub-streams do not collide with replica streams.
inline std::uint64_t substream(std::uint64_t stream, std::uint64_t tag) {
  return splitmix64(stream ^ splitmix64(tag + 0x5bd1e995u));
}

}  // namespace prmix
