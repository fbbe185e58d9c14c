#pragma once

#include <cstdint>

namespace gridmc {

// SplitMix64 used as a counter-based generator: output i of stream `seed`
// is splitmix64(seed, i). Stateless apart from the counter, so replications
// can be seeded as independent substreams deterministically. The generator
// identity is part of the tool's reproducibility contract.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  // substream r of a master seed; mixes the replication index through the
  // same finalizer so substreams are decorrelated
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t r) {
    return SplitMix64(seed ^ mix(r + 0x9e3779b97f4a7c15ull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // uniform on (0,1]; never 0, so -log stays finite
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

}  // namespace gridmc
