#include "qndcount/random.hpp"

namespace qndcount {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t t = splitmix64(s) ^ (stream * 0xd1b54a32d192ed03ULL);
  engine_.seed(splitmix64(t));
}

}  // namespace qndcount
