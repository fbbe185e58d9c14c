#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "gridmc/model.hpp"

namespace gridmc {

struct BuildError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BuildOptions {
  std::uint64_t max_states = 10'000'000;
};

struct VarInfo {
  std::string name;
  std::int32_t lo, hi;
  bool is_bool;
};

struct Transition {
  std::uint32_t src, dst;
  std::int32_t label;  // index into labels(), -1 = unlabeled
  double rate;
};

// Explicit CTMC: reachable states in BFS discovery order, merged transition
// list (parallel edges with equal source, destination and label are
// rate-summed; self-loops retained), exit rates, and lazy reward evaluation
// backed by the folded model.
class StateSpace {
public:
  std::uint32_t num_states() const;
  std::uint32_t num_vars() const;
  std::uint32_t initial() const;
  const std::vector<VarInfo>& vars() const;
  const std::int32_t* state(std::uint32_t idx) const;  // num_vars() values

  const std::vector<std::string>& labels() const;
  const std::vector<Transition>& transitions() const;  // grouped by src, ascending
  const std::uint32_t* row_begin() const;              // num_states()+1 offsets
  const std::vector<double>& exit_rates() const;       // E(s), self-loops included

  // Distinct (src,dst) pairs, the transition-matrix nonzero count. Differs
  // from transitions().size() when one pair carries several labels.
  std::uint64_t matrix_nnz() const;

  std::vector<std::string> reward_names() const;

  // rho(s) = state rewards + sum over outgoing transitions of
  // rate * impulse (per original command instance, before merging).
  std::vector<double> reward_rate_vector(std::string_view name) const;
  // State-item part only (per-hour accrual while in s).
  std::vector<double> state_reward_vector(std::string_view name) const;
  // Expected impulse per merged transition (rate-weighted mean over the
  // merged instances); aligned with transitions().
  std::vector<double> transition_expected_impulse(std::string_view name) const;

  // States satisfying a boolean expression over the model's variables
  // (constants are folded in here, so expressions may mention them).
  std::vector<bool> satisfying(const ExprPtr& pred) const;

  // One line per state: `index var=value ...`.
  void export_states(std::ostream& os) const;
  // One line per transition: `src dst rate [label]`.
  void export_transitions(std::ostream& os) const;

  struct Impl;
  std::shared_ptr<const Impl> impl;
};

StateSpace build(const ModelIR& m, const BuildOptions& opts = {});

std::vector<double> exit_rates(const StateSpace& space);

std::vector<double> reward_rate_vector(const StateSpace& space, std::string_view name);

}  // namespace gridmc
