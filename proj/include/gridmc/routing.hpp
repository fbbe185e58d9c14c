#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gridmc {

// Linear tower chain: regular links (i,i+1), backup links (i,i+2), receive-
// only terminals 1 and N.
struct LineTopology {
  int n;
  explicit LineTopology(int towers);
  bool is_terminal(int t) const { return t == 1 || t == n; }
  bool is_backup(int u, int v) const { return std::abs(u - v) == 2; }
};

enum class HopKind { Regular, Backup };

struct Route {
  std::vector<int> path;          // starts at the tower, ends at a terminal
  std::vector<HopKind> hops;      // path.size()-1 entries
  int backup_hops() const;
};

// Route per operational non-terminal tower, or nullopt if no operational
// terminal is reachable.
struct RouteTable {
  int n = 0;
  std::set<int> failed;
  std::map<int, std::optional<Route>> routes;

  std::string to_text() const;   // human-readable table
  std::string to_json() const;
};

// Cheapest path to any operational terminal over the operational subgraph,
// by lexicographic (backup-hop count, total hops); ties between the two
// terminals break toward tower 1.
RouteTable compute_routes(const LineTopology& topo, const std::set<int>& failed);

enum class LinkClass { Normal, Rerouted, Expensive };

struct LinkRule {
  int from, to;                       // directed link as used
  LinkClass cls;
  std::vector<std::set<int>> conditions;  // minimal failure sets; empty set = normal use
};

struct LinkRuleSet {
  int n = 0;
  int max_failures = 0;
  std::map<int, std::vector<LinkRule>> send;     // tower -> first-hop rules
  std::map<int, std::vector<LinkRule>> receive;  // tower -> incoming-hop rules
};

// Enumerate every failure set of size <= max_failures, run compute_routes,
// and group the outcomes per tower and directed link with the minimal
// failure conditions under which that link is used. `cap` bounds the number
// of enumerated sets.
LinkRuleSet derive_link_rules(const LineTopology& topo, int max_failures,
                              std::uint64_t cap = 1u << 20);

struct CheapLinkExact {};
struct CheapLinkMonteCarlo {
  std::uint64_t samples;
  std::uint64_t seed;
};

// Expected fraction of per-cycle transmissions that use only regular links
// when tower i fails independently with probability probs[i-1].
// Transmissions from failed or unroutable towers leave the denominator; a
// draw with no routable tower contributes zero. Exact mode sums all 2^N
// failure sets (N <= 20).
double estimate_cheap_link_probability(const LineTopology& topo,
                                       const std::vector<double>& probs, CheapLinkExact);
double estimate_cheap_link_probability(const LineTopology& topo,
                                       const std::vector<double>& probs, CheapLinkMonteCarlo mc);

}  // namespace gridmc
