#pragma once

#include <string>
#include <vector>

#include "gridmc/state_space.hpp"

namespace gridmc {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SteadyMethod { Power, Jacobi, GaussSeidel };

const char* to_string(SteadyMethod m);
SteadyMethod steady_method_from_string(std::string_view s);

struct SolverOptions {
  SteadyMethod method = SteadyMethod::GaussSeidel;
  double epsilon = 1e-9;       // relative convergence threshold
  int max_iters = 10000;
  double unif_epsilon = 1e-10; // Poisson truncation: discarded mass bound
};

struct SolveInfo {
  std::string method;
  long iterations = 0;   // solver sweeps, or uniformization terms consumed
  double residual = 0.0;
  bool steady_detected = false;
};

// Strongly connected components with no outgoing edges (self-loops ignored).
// Deterministic order; each component's states ascend.
std::vector<std::vector<std::uint32_t>> bottom_sccs(const StateSpace& space);

// pi with pi Q = 0 and sum(pi) = 1. Solves each bottom SCC with the chosen
// iterative method, weights the solutions by the probability of reaching
// that component from the initial state, and assigns 0 to transient states.
std::vector<double> steady_state(const StateSpace& space, const SolverOptions& opts = {},
                                 SolveInfo* info = nullptr);

// Row initial of exp(Qt) via uniformization with left/right Poisson
// truncation and steady-state detection.
std::vector<double> transient_distribution(const StateSpace& space, double t,
                                           const SolverOptions& opts = {},
                                           SolveInfo* info = nullptr);

// P[ F<=t target ]: target states made absorbing, transient mass on them.
double bounded_reachability(const StateSpace& space, const std::vector<bool>& target, double t,
                            const SolverOptions& opts = {}, SolveInfo* info = nullptr);

// P[ phi1 U<=t phi2 ].
double bounded_until(const StateSpace& space, const std::vector<bool>& phi1,
                     const std::vector<bool>& phi2, double t, const SolverOptions& opts = {},
                     SolveInfo* info = nullptr);

// E[ integral_0^t rho(X_u) du ] for the named reward structure.
double cumulative_expected_reward(const StateSpace& space, std::string_view reward, double t,
                                  const SolverOptions& opts = {}, SolveInfo* info = nullptr);

// sum_s pi(s) rho(s).
double long_run_expected_reward(const StateSpace& space, std::string_view reward,
                                const SolverOptions& opts = {}, SolveInfo* info = nullptr);

}  // namespace gridmc
