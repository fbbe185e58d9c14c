#include "gridmc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gridmc {

const char* to_string(SteadyMethod m) {
  switch (m) {
    case SteadyMethod::Power: return "power";
    case SteadyMethod::Jacobi: return "jacobi";
    case SteadyMethod::GaussSeidel: return "gauss-seidel";
  }
  return "?";
}

SteadyMethod steady_method_from_string(std::string_view s) {
  if (s == "power") return SteadyMethod::Power;
  if (s == "jacobi") return SteadyMethod::Jacobi;
  if (s == "gauss-seidel" || s == "gauss_seidel") return SteadyMethod::GaussSeidel;
  throw SolverError("unknown steady-state method `" + std::string(s) + "`");
}

namespace {

constexpr double kDetectEps = 1e-13;  // successive-difference threshold
constexpr int kDetectRuns = 4;        // consecutive hits before declaring steady

// ---------------------------------------------------------------- Tarjan ---
struct SccResult {
  std::vector<std::int32_t> comp;  // state -> component id
  std::int32_t count = 0;
};

SccResult tarjan(const StateSpace& space) {
  const auto n = space.num_states();
  const auto& tr = space.transitions();
  const auto* rows = space.row_begin();

  SccResult res;
  res.comp.assign(n, -1);
  std::vector<std::int32_t> index(n, -1), low(n, 0);
  std::vector<std::uint32_t> stack, frame_state, frame_edge;
  std::vector<bool> on_stack(n, false);
  std::int32_t next_index = 0;

  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    frame_state.push_back(root);
    frame_edge.push_back(rows[root]);
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frame_state.empty()) {
      std::uint32_t v = frame_state.back();
      std::uint32_t& e = frame_edge.back();
      if (e < rows[v + 1]) {
        std::uint32_t w = tr[e].dst;
        ++e;
        if (w == v) continue;  // self-loop
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          frame_state.push_back(w);
          frame_edge.push_back(rows[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      } else {
        if (low[v] == index[v]) {
          for (;;) {
            std::uint32_t w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            res.comp[w] = res.count;
            if (w == v) break;
          }
          ++res.count;
        }
        frame_state.pop_back();
        frame_edge.pop_back();
        if (!frame_state.empty()) {
          std::uint32_t parent = frame_state.back();
          low[parent] = std::min(low[parent], low[v]);
        }
      }
    }
  }
  return res;
}

// --------------------------------------------------------------- Poisson ---
struct PoissonWeights {
  std::int64_t left = 0;
  std::vector<double> w;  // normalized over [left, left+w.size())
  double lambda_t = 0;
  std::int64_t right() const { return left + static_cast<std::int64_t>(w.size()) - 1; }
};

// Log-domain expansion around the mode with left/right truncation so the
// discarded true mass is below eps; retained weights are renormalized.
PoissonWeights poisson_weights(double lt, double eps) {
  PoissonWeights pw;
  pw.lambda_t = lt;
  if (lt <= 0) {
    pw.left = 0;
    pw.w = {1.0};
    return pw;
  }
  const auto mode = static_cast<std::int64_t>(lt);
  // weights relative to the mode's, expanded until below cut
  const double cut = std::min(eps * 1e-4, 1e-18);
  std::vector<double> right;
  right.push_back(1.0);
  for (std::int64_t k = mode + 1;; ++k) {
    double w = right.back() * (lt / static_cast<double>(k));
    if (w < cut) break;
    right.push_back(w);
  }
  std::vector<double> left;
  for (std::int64_t k = mode; k > 0;) {
    double prev = left.empty() ? 1.0 : left.back();
    double w = prev * (static_cast<double>(k) / lt);
    --k;
    if (w < cut) break;
    left.push_back(w);
  }
  pw.left = mode - static_cast<std::int64_t>(left.size());
  pw.w.assign(left.rbegin(), left.rend());
  pw.w.insert(pw.w.end(), right.begin(), right.end());
  double total = std::accumulate(pw.w.begin(), pw.w.end(), 0.0);
  // trim tails down to eps/2 each, then renormalize
  double lo_budget = total * eps * 0.5;
  double acc = 0;
  std::size_t drop_lo = 0;
  while (drop_lo < pw.w.size() && acc + pw.w[drop_lo] < lo_budget) acc += pw.w[drop_lo++];
  acc = 0;
  std::size_t drop_hi = 0;
  while (drop_hi < pw.w.size() - drop_lo &&
         acc + pw.w[pw.w.size() - 1 - drop_hi] < lo_budget)
    acc += pw.w[pw.w.size() - 1 - drop_hi++];
  pw.w.erase(pw.w.end() - drop_hi, pw.w.end());
  pw.w.erase(pw.w.begin(), pw.w.begin() + drop_lo);
  pw.left += static_cast<std::int64_t>(drop_lo);
  total = std::accumulate(pw.w.begin(), pw.w.end(), 0.0);
  for (auto& w : pw.w) w /= total;
  return pw;
}

// ------------------------------------------------- uniformized iteration ---
// P = I + Q/lambda, restricted so rows in `absorb` keep all mass in place.
// Off-diagonal entries are filtered and pre-divided once; the step is a
// plain scaled scatter.
struct Uniformized {
  double lambda;
  std::vector<double> diag;
  std::vector<std::uint32_t> src, dst;
  std::vector<double> p;

  Uniformized(const StateSpace& s, const std::vector<bool>* absorb) {
    const auto& exit = s.exit_rates();
    double max_active = 0;
    for (std::uint32_t i = 0; i < s.num_states(); ++i) {
      if (absorb && (*absorb)[i]) continue;
      max_active = std::max(max_active, exit[i]);
    }
    lambda = max_active > 0 ? 1.02 * max_active : 1.0;
    diag.assign(s.num_states(), 1.0);
    for (const auto& t : s.transitions()) {
      if (t.src == t.dst) continue;  // self-loops cancel out of Q
      if (absorb && (*absorb)[t.src]) continue;
      diag[t.src] -= t.rate / lambda;
      src.push_back(t.src);
      dst.push_back(t.dst);
      p.push_back(t.rate / lambda);
    }
  }

  void step(const std::vector<double>& y, std::vector<double>& yn) const {
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) yn[i] = y[i] * diag[i];
    const std::size_t m = src.size();
    for (std::size_t i = 0; i < m; ++i) yn[dst[i]] += y[src[i]] * p[i];
  }
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// Transient distribution, or (with rho) the cumulative reward integral.
// Steady-state detection closes the remaining series analytically.
struct TransientResult {
  std::vector<double> dist;
  double reward = 0;
};

TransientResult transient_engine(const StateSpace& space, double t,
                                 const std::vector<bool>* absorb, const std::vector<double>* rho,
                                 const SolverOptions& opts, SolveInfo* info) {
  const auto n = space.num_states();
  std::vector<double> y(n, 0.0), yn(n);
  y[space.initial()] = 1.0;

  Uniformized P(space, absorb);
  PoissonWeights pw = poisson_weights(P.lambda * t, opts.unif_epsilon);
  const std::int64_t right = pw.right();

  // survivor function over the normalized weights: surv[i] = sum w[i+1..]
  std::vector<double> surv(pw.w.size());
  double acc = 0;
  for (std::size_t i = pw.w.size(); i-- > 0;) {
    surv[i] = acc;
    acc += pw.w[i];
  }

  TransientResult res;
  res.dist.assign(n, 0.0);
  double sum_surv = 0;  // sum of survivor values consumed so far
  double weight_used = 0;
  int detect_run = 0;
  long k = 0;
  for (;; ++k) {
    if (k >= pw.left) {
      std::size_t i = static_cast<std::size_t>(k - pw.left);
      if (rho == nullptr && i < pw.w.size()) {
        double w = pw.w[i];
        for (std::uint32_t s = 0; s < n; ++s) res.dist[s] += w * y[s];
        weight_used += w;
      }
    }
    if (rho) {
      double sk = k < pw.left ? 1.0
                 : (static_cast<std::size_t>(k - pw.left) < surv.size()
                        ? surv[static_cast<std::size_t>(k - pw.left)]
                        : 0.0);
      double vk = 0;
      for (std::uint32_t s = 0; s < n; ++s) vk += y[s] * (*rho)[s];
      res.reward += sk * vk;
      sum_surv += sk;
    }
    if (k >= right) break;
    P.step(y, yn);
    double diff = max_abs_diff(y, yn);
    y.swap(yn);
    if (diff < kDetectEps) {
      if (++detect_run >= kDetectRuns) {
        if (info) info->steady_detected = true;
        break;
      }
    } else {
      detect_run = 0;
    }
  }
  if (info) {
    info->iterations = k;
    info->method = "uniformization";
  }
  if (rho == nullptr) {
    double rem = 1.0 - weight_used;
    if (rem > 0)
      for (std::uint32_t s = 0; s < n; ++s) res.dist[s] += rem * y[s];
  } else {
    // remaining sum with v_k frozen at the detected fixed point;
    // sum_{k>=0} surv(k) equals E[N_t] = lambda*t exactly
    if (k < right) {
      double vk = 0;
      for (std::uint32_t s = 0; s < n; ++s) vk += y[s] * (*rho)[s];
      res.reward += vk * std::max(0.0, P.lambda * t - sum_surv);
    }
    res.reward /= P.lambda;
    res.dist = std::move(y);
  }
  return res;
}

// ------------------------------------------ linear steady-state solvers ---
// Stationary vector of one closed component, local indexing.
struct Component {
  std::vector<std::uint32_t> states;             // global ids, ascending
  std::vector<std::uint32_t> local;              // scratch: global -> local
};

std::vector<double> solve_bscc(const StateSpace& space, const std::vector<std::uint32_t>& states,
                               const SolverOptions& opts, SolveInfo* info) {
  const std::size_t m = states.size();
  if (m == 1) return {1.0};

  std::vector<std::uint32_t> local(space.num_states(), 0);
  for (std::size_t i = 0; i < m; ++i) local[states[i]] = static_cast<std::uint32_t>(i);
  std::vector<bool> member(space.num_states(), false);
  for (auto s : states) member[s] = true;

  // D(j): off-diagonal outflow; self(j): retained self-loop rate; incoming
  // lists by destination (local CSR)
  std::vector<double> D(m, 0.0), self(m, 0.0);
  std::vector<std::uint32_t> in_count(m + 1, 0);
  const auto& tr = space.transitions();
  for (const auto& t : tr) {
    if (!member[t.src]) continue;
    if (t.src == t.dst) {
      self[local[t.src]] += t.rate;
      continue;
    }
    D[local[t.src]] += t.rate;
    ++in_count[local[t.dst] + 1];
  }
  for (std::size_t i = 0; i < m; ++i) in_count[i + 1] += in_count[i];
  std::vector<std::uint32_t> in_src(in_count[m]);
  std::vector<double> in_rate(in_count[m]);
  {
    std::vector<std::uint32_t> fill(in_count.begin(), in_count.end() - 1);
    for (const auto& t : tr) {
      if (!member[t.src] || t.src == t.dst) continue;
      auto d = local[t.dst];
      in_src[fill[d]] = local[t.src];
      in_rate[fill[d]] = t.rate;
      ++fill[d];
    }
  }

  std::vector<double> pi(m, 1.0 / static_cast<double>(m));
  auto normalize = [&](std::vector<double>& v) {
    double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (auto& x : v) x /= s;
  };
  auto rel_diff = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double r = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double d = std::fabs(a[i] - b[i]);
      double ref = std::max(std::fabs(b[i]), 1e-300);
      r = std::max(r, d / ref);
    }
    return r;
  };
  auto residual = [&](const std::vector<double>& v) {
    // ||pi Q||_inf restricted to the component
    std::vector<double> q(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      q[j] -= v[j] * D[j];
      for (auto e = in_count[j]; e < in_count[j + 1]; ++e) q[j] += v[in_src[e]] * in_rate[e];
    }
    double r = 0;
    for (auto x : q) r = std::max(r, std::fabs(x));
    return r;
  };

  // Power and Jacobi keep self-loops in the operator (uniformization over
  // full exit rates, self inflow on the Jacobi diagonal), which is how the
  // classic tools iterate and why both can stall on send-heavy chains.
  // Gauss-Seidel eliminates self-loops algebraically, so it converges where
  // they do not; all three share the fixed point pi Q = 0.
  double lambda = 0;
  for (std::size_t j = 0; j < m; ++j) lambda = std::max(lambda, D[j] + self[j]);
  lambda *= 1.02;
  std::vector<double> prev(m);
  long iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    prev = pi;
    switch (opts.method) {
      case SteadyMethod::Power: {
        // pi <- pi (I + Q/lambda), lambda > max exit rate
        std::vector<double> next(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
          next[j] += pi[j] * (1.0 - D[j] / lambda);
          for (auto e = in_count[j]; e < in_count[j + 1]; ++e)
            next[j] += pi[in_src[e]] * (in_rate[e] / lambda);
        }
        pi = std::move(next);
        break;
      }
      case SteadyMethod::Jacobi: {
        std::vector<double> next(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
          double acc = prev[j] * self[j];
          for (auto e = in_count[j]; e < in_count[j + 1]; ++e)
            acc += prev[in_src[e]] * in_rate[e];
          next[j] = acc / (D[j] + self[j]);
        }
        pi = std::move(next);
        normalize(pi);
        break;
      }
      case SteadyMethod::GaussSeidel: {
        for (std::size_t j = 0; j < m; ++j) {
          double acc = 0;
          for (auto e = in_count[j]; e < in_count[j + 1]; ++e)
            acc += pi[in_src[e]] * in_rate[e];
          pi[j] = acc / D[j];
        }
        normalize(pi);
        break;
      }
    }
    if (rel_diff(pi, prev) < opts.epsilon) {
      if (opts.method == SteadyMethod::Power) normalize(pi);
      double res = residual(pi);
      double scale = *std::max_element(pi.begin(), pi.end());
      if (res < opts.epsilon * std::max(scale, 1e-300) * std::max(lambda, 1.0)) {
        if (info) {
          info->iterations += iter + 1;
          info->residual = std::max(info->residual, res);
        }
        return pi;
      }
    }
  }
  double res = residual(pi);
  throw SolverError(std::string("steady-state ") + to_string(opts.method) +
                    " did not converge within " + std::to_string(opts.max_iters) +
                    " iterations (residual " + std::to_string(res) +
                    "); try --method gauss-seidel");
}

}  // namespace

std::vector<std::vector<std::uint32_t>> bottom_sccs(const StateSpace& space) {
  SccResult scc = tarjan(space);
  std::vector<bool> has_exit(scc.count, false);
  for (const auto& t : space.transitions())
    if (scc.comp[t.src] != scc.comp[t.dst]) has_exit[scc.comp[t.src]] = true;
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::int32_t> remap(scc.count, -1);
  for (std::uint32_t s = 0; s < space.num_states(); ++s) {
    auto c = scc.comp[s];
    if (has_exit[c]) continue;
    if (remap[c] == -1) {
      remap[c] = static_cast<std::int32_t>(out.size());
      out.emplace_back();
    }
    out[remap[c]].push_back(s);
  }
  return out;
}

std::vector<double> steady_state(const StateSpace& space, const SolverOptions& opts,
                                 SolveInfo* info) {
  const auto n = space.num_states();
  auto bsccs = bottom_sccs(space);
  if (info) info->method = to_string(opts.method);

  std::vector<double> weights(bsccs.size(), 0.0);
  if (bsccs.size() == 1 &&
      bsccs[0].size() == n) {
    weights[0] = 1.0;
  } else {
    // membership map
    std::vector<std::int32_t> in_bscc(n, -1);
    for (std::size_t b = 0; b < bsccs.size(); ++b)
      for (auto s : bsccs[b]) in_bscc[s] = static_cast<std::int32_t>(b);
    if (in_bscc[space.initial()] >= 0) {
      weights[in_bscc[space.initial()]] = 1.0;
    } else {
      // push transient mass forward through the uniformized chain,
      // accumulating what crosses into each bottom component
      std::vector<bool> absorb(n, false);
      for (std::uint32_t s = 0; s < n; ++s) absorb[s] = in_bscc[s] >= 0;
      Uniformized P(space, &absorb);
      std::vector<double> y(n, 0.0), yn(n);
      y[space.initial()] = 1.0;
      double transient_mass = 1.0;
      long guard = 0;
      while (transient_mass > opts.epsilon * 1e-3) {
        if (++guard > static_cast<long>(opts.max_iters) * 100)
          throw SolverError("bottom-component reachability did not converge");
        P.step(y, yn);
        y.swap(yn);
        transient_mass = 0;
        for (std::uint32_t s = 0; s < n; ++s) {
          if (in_bscc[s] >= 0 && y[s] > 0) {
            weights[in_bscc[s]] += y[s];
            y[s] = 0;
          } else {
            transient_mass += y[s];
          }
        }
      }
      double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      for (auto& w : weights) w /= total;
    }
  }

  std::vector<double> pi(n, 0.0);
  for (std::size_t b = 0; b < bsccs.size(); ++b) {
    if (weights[b] == 0.0) continue;
    std::vector<double> local = solve_bscc(space, bsccs[b], opts, info);
    for (std::size_t i = 0; i < bsccs[b].size(); ++i) pi[bsccs[b][i]] = weights[b] * local[i];
  }
  return pi;
}

std::vector<double> transient_distribution(const StateSpace& space, double t,
                                           const SolverOptions& opts, SolveInfo* info) {
  if (t < 0) throw SolverError("negative time bound");
  return transient_engine(space, t, nullptr, nullptr, opts, info).dist;
}

double bounded_reachability(const StateSpace& space, const std::vector<bool>& target, double t,
                            const SolverOptions& opts, SolveInfo* info) {
  if (t < 0) throw SolverError("negative time bound");
  auto res = transient_engine(space, t, &target, nullptr, opts, info);
  double p = 0;
  for (std::uint32_t s = 0; s < space.num_states(); ++s)
    if (target[s]) p += res.dist[s];
  return p;
}

double bounded_until(const StateSpace& space, const std::vector<bool>& phi1,
                     const std::vector<bool>& phi2, double t, const SolverOptions& opts,
                     SolveInfo* info) {
  if (t < 0) throw SolverError("negative time bound");
  const auto n = space.num_states();
  std::vector<bool> absorb(n, false);
  for (std::uint32_t s = 0; s < n; ++s)
    absorb[s] = phi2[s] || (!phi1[s] && !phi2[s]);  // goal or dead
  auto res = transient_engine(space, t, &absorb, nullptr, opts, info);
  double p = 0;
  for (std::uint32_t s = 0; s < n; ++s)
    if (phi2[s]) p += res.dist[s];
  return p;
}

double cumulative_expected_reward(const StateSpace& space, std::string_view reward, double t,
                                  const SolverOptions& opts, SolveInfo* info) {
  if (t < 0) throw SolverError("negative time bound");
  if (t == 0) return 0.0;
  std::vector<double> rho = space.reward_rate_vector(reward);
  return transient_engine(space, t, nullptr, &rho, opts, info).reward;
}

double long_run_expected_reward(const StateSpace& space, std::string_view reward,
                                const SolverOptions& opts, SolveInfo* info) {
  std::vector<double> rho = space.reward_rate_vector(reward);
  std::vector<double> pi = steady_state(space, opts, info);
  double v = 0;
  for (std::size_t i = 0; i < pi.size(); ++i) v += pi[i] * rho[i];
  return v;
}

}  // namespace gridmc
