#pragma once

#include <cstdint>
#include <optional>

#include "gridmc/properties.hpp"

namespace gridmc {

struct PathStep {
  std::uint32_t state;
  double sojourn;
  std::int64_t transition;  // index into space.transitions(), -1 if none taken
};

struct Path {
  std::vector<PathStep> steps;
  double elapsed = 0;
};

struct Estimate {
  double value = 0;
  std::optional<double> std_error;  // absent when it cannot be estimated (n=1)
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

struct SimOptions {
  double horizon_for_steady = 1e6;  // total simulated hours for steady kinds
  double warmup_fraction = 0.1;
};

// One trajectory under the race semantics: sojourn ~ Exp(E(s)), successor
// picked with probability rate/E(s). Self-loops are real jumps. An absorbing
// state ends the path at the horizon.
Path sample_path(const StateSpace& space, double horizon, std::uint64_t seed);

// Monte Carlo estimate of a property. Bounded kinds average an indicator or
// accumulated reward over n independent paths. Steady kinds time-average one
// long path of horizon_for_steady hours after discarding the warm-up, with
// the standard error taken over n batches. Refuses steady estimation when
// the chain has more than one bottom component.
Estimate estimate(const StateSpace& space, const Property& prop, std::uint64_t n_samples,
                  std::uint64_t seed, const SimOptions& opts = {});

}  // namespace gridmc
