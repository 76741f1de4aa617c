#pragma once

#include <cstdint>
#include <random>

namespace qndcount {

// Advances `state` and returns the next SplitMix64 output.
std::uint64_t splitmix64(std::uint64_t& state);

// Independent stream `stream` of a run seeded with `seed`. Trajectory i always
// draws from the same streams, whatever the batch partitioning.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qndcount
