#include "gridmc/simulator.hpp"

#include <cmath>

#include "gridmc/rng.hpp"

namespace gridmc {

namespace {

double exp_draw(SplitMix64& rng, double rate) { return -std::log(rng.next_unit()) / rate; }

// Jump selection over a state's outgoing transitions. `skip_self` integrates
// self-loops out of the race: the state trajectory keeps the same law, the
// sojourn in s becomes one Exp(E(s) - selfrate) draw instead of a geometric
// number of Exp(E(s)) pieces. Self-loop reward impulses are then accrued at
// selfrate * impulse per hour, which has the same expectation.
struct Walker {
  const StateSpace& space;
  std::vector<double> leave_rate;  // outgoing rate, self-loops excluded

  explicit Walker(const StateSpace& s) : space(s) {
    leave_rate.assign(s.num_states(), 0.0);
    for (const auto& t : s.transitions())
      if (t.src != t.dst) leave_rate[t.src] += t.rate;
  }

  // returns transition index, or -1 if `from` cannot leave
  std::int64_t pick(std::uint32_t from, SplitMix64& rng) const {
    double total = leave_rate[from];
    if (total <= 0) return -1;
    double u = rng.next_unit() * total;
    const auto* rows = space.row_begin();
    std::int64_t last = -1;
    for (auto i = rows[from]; i < rows[from + 1]; ++i) {
      const auto& t = space.transitions()[i];
      if (t.src == t.dst) continue;
      last = i;
      u -= t.rate;
      if (u <= 0) return i;
    }
    return last;  // guard against rounding at the row end
  }
};

struct Welford {
  std::uint64_t n = 0;
  double mean = 0, m2 = 0;
  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  std::optional<double> std_error() const {
    if (n < 2) return std::nullopt;
    double var = m2 / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace

Path sample_path(const StateSpace& space, double horizon, std::uint64_t seed) {
  if (horizon <= 0) throw SolverError("horizon must be positive");
  SplitMix64 rng(seed);
  const auto& exit = space.exit_rates();
  const auto* rows = space.row_begin();
  Path path;
  std::uint32_t s = space.initial();
  while (path.elapsed < horizon) {
    double e = exit[s];
    if (e <= 0) {
      path.steps.push_back({s, horizon - path.elapsed, -1});
      path.elapsed = horizon;
      break;
    }
    double sojourn = exp_draw(rng, e);
    if (path.elapsed + sojourn >= horizon) {
      path.steps.push_back({s, horizon - path.elapsed, -1});
      path.elapsed = horizon;
      break;
    }
    // race over all outgoing transitions, self-loops included
    double u = rng.next_unit() * e;
    std::int64_t taken = rows[s + 1] > rows[s] ? static_cast<std::int64_t>(rows[s + 1]) - 1 : -1;
    for (auto i = rows[s]; i < rows[s + 1]; ++i) {
      u -= space.transitions()[i].rate;
      if (u <= 0) {
        taken = i;
        break;
      }
    }
    path.steps.push_back({s, sojourn, taken});
    path.elapsed += sojourn;
    s = space.transitions()[taken].dst;
  }
  return path;
}

namespace {

double run_bounded(const StateSpace& space, const Property& prop, const Walker& walker,
                   const std::vector<bool>& sat1, const std::vector<bool>& sat2,
                   const std::vector<double>* state_rate, const std::vector<double>* impulse,
                   const std::vector<double>* self_impulse_rate, SplitMix64 rng) {
  std::uint32_t s = space.initial();
  double elapsed = 0, reward = 0;
  const double bound = prop.bound;
  for (;;) {
    switch (prop.kind) {
      case PropertyKind::BoundedF:
        if (sat1[s]) return 1.0;
        break;
      case PropertyKind::BoundedG:
        if (!sat1[s]) return 0.0;
        break;
      case PropertyKind::BoundedU:
        if (sat2[s]) return 1.0;
        if (!sat1[s]) return 0.0;
        break;
      default:
        break;
    }
    double rate = walker.leave_rate[s];
    double sojourn = rate > 0 ? exp_draw(rng, rate) : bound - elapsed;
    double dwell = std::min(sojourn, bound - elapsed);
    if (prop.kind == PropertyKind::CumulReward)
      reward += dwell * ((*state_rate)[s] + (*self_impulse_rate)[s]);
    elapsed += sojourn;
    if (elapsed >= bound || rate <= 0) {
      switch (prop.kind) {
        case PropertyKind::BoundedF: return 0.0;
        case PropertyKind::BoundedG: return 1.0;
        case PropertyKind::BoundedU: return 0.0;
        default: return reward;
      }
    }
    std::int64_t taken = walker.pick(s, rng);
    if (prop.kind == PropertyKind::CumulReward) reward += (*impulse)[taken];
    s = space.transitions()[taken].dst;
  }
}

}  // namespace

Estimate estimate(const StateSpace& space, const Property& prop, std::uint64_t n_samples,
                  std::uint64_t seed, const SimOptions& opts) {
  if (n_samples < 1) throw SolverError("need at least one sample");
  Estimate est;
  est.samples = n_samples;
  est.seed = seed;

  Walker walker(space);
  std::vector<bool> sat1, sat2;
  if (prop.pred1) sat1 = space.satisfying(prop.pred1);
  if (prop.pred2) sat2 = space.satisfying(prop.pred2);

  std::vector<double> state_rate, impulse, self_impulse_rate;
  if (prop.is_reward()) {
    state_rate = space.state_reward_vector(prop.reward);
    impulse = space.transition_expected_impulse(prop.reward);
    self_impulse_rate.assign(space.num_states(), 0.0);
    const auto& tr = space.transitions();
    for (std::size_t i = 0; i < tr.size(); ++i)
      if (tr[i].src == tr[i].dst) self_impulse_rate[tr[i].src] += tr[i].rate * impulse[i];
  }

  Welford acc;
  switch (prop.kind) {
    case PropertyKind::BoundedF:
    case PropertyKind::BoundedG:
    case PropertyKind::BoundedU:
    case PropertyKind::CumulReward: {
      for (std::uint64_t i = 0; i < n_samples; ++i)
        acc.add(run_bounded(space, prop, walker, sat1, sat2, &state_rate, &impulse,
                            &self_impulse_rate, SplitMix64::substream(seed, i)));
      break;
    }
    case PropertyKind::SteadyProb:
    case PropertyKind::SteadyReward: {
      if (bottom_sccs(space).size() > 1)
        throw SolverError(
            "steady-state simulation refused: the chain has several bottom components, so a "
            "time average would depend on which one the path happens to enter");
      // one long path; batch means over n_samples batches after warm-up
      const double total = opts.horizon_for_steady;
      const double warmup = total * opts.warmup_fraction;
      const double batch_len = (total - warmup) / static_cast<double>(n_samples);
      SplitMix64 rng = SplitMix64::substream(seed, 0);
      std::uint32_t s = space.initial();
      double now = 0;
      double batch_acc = 0;  // accumulated quantity within the current batch
      std::uint64_t batch = 0;
      auto rate_in = [&](std::uint32_t st) {
        if (prop.kind == PropertyKind::SteadyProb) return sat1[st] ? 1.0 : 0.0;
        return state_rate[st] + self_impulse_rate[st];
      };
      while (batch < n_samples) {
        double rate = walker.leave_rate[s];
        double sojourn = rate > 0 ? exp_draw(rng, rate) : total - now;
        double seg_end = std::min(now + sojourn, total);
        // split the dwell across warm-up and batch boundaries
        double t0 = now, t1 = seg_end;
        double r = rate_in(s);
        while (t0 < t1) {
          if (t0 < warmup) {
            t0 = std::min(t1, warmup);
            continue;
          }
          std::uint64_t b = static_cast<std::uint64_t>((t0 - warmup) / batch_len);
          if (b >= n_samples) break;
          double b_end = warmup + static_cast<double>(b + 1) * batch_len;
          double seg = std::min(t1, b_end) - t0;
          if (b == batch) {
            batch_acc += r * seg;
          } else {
            // crossed into the next batch: flush completed ones
            while (batch < b) {
              acc.add(batch_acc / batch_len);
              batch_acc = 0;
              ++batch;
            }
            batch_acc += r * seg;
          }
          t0 = std::min(t1, b_end);
        }
        now += sojourn;
        if (now >= total || rate <= 0) {
          while (batch < n_samples) {
            acc.add(batch_acc / batch_len);
            batch_acc = 0;
            ++batch;
          }
          break;
        }
        std::int64_t taken = walker.pick(s, rng);
        // the dwell split above advanced `batch` to the batch containing
        // `now`, so the impulse lands in the currently open batch
        if (prop.kind == PropertyKind::SteadyReward && now > warmup && batch < n_samples)
          batch_acc += impulse[taken];
        s = space.transitions()[taken].dst;
      }
      break;
    }
  }
  est.value = acc.mean;
  est.std_error = acc.std_error();
  return est;
}

}  // namespace gridmc
