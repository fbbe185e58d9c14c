#include "gridmc/routing.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "gridmc/rng.hpp"

namespace gridmc {

LineTopology::LineTopology(int towers) : n(towers) {
  if (towers < 3) throw std::invalid_argument("a line needs at least 3 towers");
}

int Route::backup_hops() const {
  return static_cast<int>(std::count(hops.begin(), hops.end(), HopKind::Backup));
}

namespace {

struct Cost {
  int backups, hops;
  bool operator<(const Cost& o) const {
    return backups != o.backups ? backups < o.backups : hops < o.hops;
  }
  bool operator==(const Cost& o) const { return backups == o.backups && hops == o.hops; }
};

constexpr Cost kInf{1 << 20, 1 << 20};

}  // namespace

RouteTable compute_routes(const LineTopology& topo, const std::set<int>& failed) {
  for (int f : failed)
    if (f < 1 || f > topo.n) throw std::invalid_argument("failed tower id out of range");
  RouteTable table;
  table.n = topo.n;
  table.failed = failed;

  auto alive = [&](int t) { return failed.count(t) == 0; };

  for (int start = 2; start < topo.n; ++start) {
    if (!alive(start)) continue;
    // Dijkstra over lexicographic (backups, hops); costs are tiny ints, a
    // priority queue keyed on (cost, node) keeps it deterministic
    std::vector<Cost> dist(topo.n + 1, kInf);
    std::vector<int> prev(topo.n + 1, 0);
    using Entry = std::pair<Cost, int>;
    auto cmp = [](const Entry& a, const Entry& b) {
      return b.first < a.first || (b.first == a.first && b.second < a.second);
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> pq(cmp);
    dist[start] = {0, 0};
    pq.push({{0, 0}, start});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (dist[u] < d) continue;
      if (topo.is_terminal(u)) continue;  // terminals only receive
      // regular neighbours first, then backups; lower index first
      const int step[4] = {u - 1, u + 1, u - 2, u + 2};
      for (int k = 0; k < 4; ++k) {
        int v = step[k];
        if (v < 1 || v > topo.n || !alive(v)) continue;
        Cost nd{d.backups + (k >= 2 ? 1 : 0), d.hops + 1};
        if (nd < dist[v]) {
          dist[v] = nd;
          prev[v] = u;
          pq.push({nd, v});
        }
      }
    }
    int best = 0;
    for (int term : {1, topo.n}) {  // tie breaks toward terminal 1
      if (!alive(term)) continue;
      if (!(dist[term] == kInf) && (best == 0 || dist[term] < dist[best])) best = term;
    }
    if (best == 0) {
      table.routes[start] = std::nullopt;
      continue;
    }
    Route r;
    for (int v = best; v != start; v = prev[v]) r.path.push_back(v);
    r.path.push_back(start);
    std::reverse(r.path.begin(), r.path.end());
    for (std::size_t i = 0; i + 1 < r.path.size(); ++i)
      r.hops.push_back(topo.is_backup(r.path[i], r.path[i + 1]) ? HopKind::Backup
                                                                : HopKind::Regular);
    table.routes[start] = std::move(r);
  }
  return table;
}

std::string RouteTable::to_text() const {
  std::ostringstream os;
  os << "towers: " << n << "  failed:";
  if (failed.empty()) os << " none";
  for (int f : failed) os << ' ' << f;
  os << '\n';
  int regular = 0, backup = 0, unroutable = 0;
  for (const auto& [tower, route] : routes) {
    os << "  T" << tower << ": ";
    if (!route) {
      os << "unroutable\n";
      ++unroutable;
      continue;
    }
    for (std::size_t i = 0; i < route->path.size(); ++i) {
      if (i) {
        bool b = route->hops[i - 1] == HopKind::Backup;
        os << (b ? " ~> " : " -> ");
        ++(b ? backup : regular);
      }
      os << route->path[i];
    }
    os << '\n';
  }
  os << "  hops: " << regular << " regular, " << backup << " backup; " << unroutable
     << " unroutable\n";
  return os.str();
}

std::string RouteTable::to_json() const {
  std::ostringstream os;
  os << "{\"towers\":" << n << ",\"failed\":[";
  bool first = true;
  for (int f : failed) os << (first ? "" : ",") << f, first = false;
  os << "],\"routes\":{";
  first = true;
  for (const auto& [tower, route] : routes) {
    os << (first ? "" : ",") << '"' << tower << "\":";
    first = false;
    if (!route) {
      os << "null";
      continue;
    }
    os << "{\"path\":[";
    for (std::size_t i = 0; i < route->path.size(); ++i) os << (i ? "," : "") << route->path[i];
    os << "],\"hops\":[";
    for (std::size_t i = 0; i < route->hops.size(); ++i)
      os << (i ? "," : "") << (route->hops[i] == HopKind::Backup ? "\"backup\"" : "\"regular\"");
    os << "]}";
  }
  os << "}}";
  return os.str();
}

namespace {

// minimal elements under set inclusion, in stable order
std::vector<std::set<int>> minimal_sets(std::vector<std::set<int>> sets) {
  std::vector<std::set<int>> out;
  for (const auto& s : sets) {
    bool dominated = false;
    for (const auto& o : sets) {
      if (o.size() < s.size() && std::includes(s.begin(), s.end(), o.begin(), o.end())) {
        dominated = true;
        break;
      }
    }
    if (dominated) continue;
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  });
  return out;
}

template <class F>
void for_each_failure_set(int n, int max_failures, std::uint64_t cap, F&& fn) {
  std::vector<int> pick;
  std::uint64_t count = 0;
  auto rec = [&](auto&& self, int next, int remaining) -> void {
    if (++count > cap)
      throw std::runtime_error("failure-set enumeration exceeds cap of " + std::to_string(cap));
    fn(pick);
    if (remaining == 0) return;
    for (int t = next; t <= n; ++t) {
      pick.push_back(t);
      self(self, t + 1, remaining - 1);
      pick.pop_back();
    }
  };
  rec(rec, 1, max_failures);
}

}  // namespace

LinkRuleSet derive_link_rules(const LineTopology& topo, int max_failures, std::uint64_t cap) {
  if (max_failures < 0) throw std::invalid_argument("max_failures must be >= 0");
  LinkRuleSet rules;
  rules.n = topo.n;
  rules.max_failures = max_failures;

  // (from,to) -> failure sets under which the directed link carries a hop
  std::map<std::pair<int, int>, std::vector<std::set<int>>> used;
  for_each_failure_set(topo.n, max_failures, cap, [&](const std::vector<int>& pick) {
    std::set<int> failed(pick.begin(), pick.end());
    RouteTable rt = compute_routes(topo, failed);
    for (const auto& [tower, route] : rt.routes) {
      if (!route) continue;
      used[{route->path[0], route->path[1]}].push_back(failed);
    }
  });

  for (auto& [link, sets] : used) {
    LinkRule rule;
    rule.from = link.first;
    rule.to = link.second;
    // A tower's transmit guard may only watch its local window: the two
    // terminals and its immediate neighbours. Conditions involving remote
    // towers (which can flip the globally optimal direction) are dropped,
    // which is exactly the scope of the corpus's guard tables.
    const std::set<int> window{1, topo.n, rule.from - 1, rule.from + 1};
    std::vector<std::set<int>> minimal = minimal_sets(std::move(sets));
    for (const auto& cond : minimal) {
      if (std::includes(window.begin(), window.end(), cond.begin(), cond.end()))
        rule.conditions.push_back(cond);
    }
    if (rule.conditions.empty()) continue;
    bool normal_use =
        rule.conditions.size() == 1 && rule.conditions.front().empty();
    rule.cls = topo.is_backup(rule.from, rule.to)
                   ? LinkClass::Expensive
                   : (normal_use ? LinkClass::Normal : LinkClass::Rerouted);
    rules.send[rule.from].push_back(rule);
    rules.receive[rule.to].push_back(rule);
  }
  return rules;
}

namespace {

double cheap_fraction(const LineTopology& topo, const std::set<int>& failed) {
  RouteTable rt = compute_routes(topo, failed);
  int routable = 0, regular_only = 0;
  for (const auto& [tower, route] : rt.routes) {
    if (!route) continue;
    ++routable;
    if (route->backup_hops() == 0) ++regular_only;
  }
  if (routable == 0) return 0.0;  // dead network contributes nothing
  return static_cast<double>(regular_only) / routable;
}

}  // namespace

double estimate_cheap_link_probability(const LineTopology& topo,
                                       const std::vector<double>& probs, CheapLinkExact) {
  if (static_cast<int>(probs.size()) != topo.n)
    throw std::invalid_argument("need one failure probability per tower");
  for (double p : probs)
    if (p < 0 || p > 1) throw std::invalid_argument("failure probability outside [0,1]");
  if (topo.n > 20) throw std::invalid_argument("exact enumeration supports at most 20 towers");

  double total = 0;
  const std::uint32_t limit = 1u << topo.n;
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    double w = 1.0;
    std::set<int> failed;
    for (int t = 1; t <= topo.n; ++t) {
      if (mask & (1u << (t - 1))) {
        w *= probs[t - 1];
        failed.insert(t);
      } else {
        w *= 1.0 - probs[t - 1];
      }
    }
    if (w == 0.0) continue;
    total += w * cheap_fraction(topo, failed);
  }
  return total;
}

double estimate_cheap_link_probability(const LineTopology& topo,
                                       const std::vector<double>& probs, CheapLinkMonteCarlo mc) {
  if (static_cast<int>(probs.size()) != topo.n)
    throw std::invalid_argument("need one failure probability per tower");
  SplitMix64 rng(mc.seed);
  double total = 0;
  for (std::uint64_t i = 0; i < mc.samples; ++i) {
    std::set<int> failed;
    for (int t = 1; t <= topo.n; ++t)
      if (rng.next_unit() <= probs[t - 1]) failed.insert(t);
    total += cheap_fraction(topo, failed);
  }
  return total / static_cast<double>(mc.samples);
}

}  // namespace gridmc
