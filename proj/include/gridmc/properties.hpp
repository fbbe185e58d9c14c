#pragma once

#include <string>

#include "gridmc/numerics.hpp"

namespace gridmc {

enum class PropertyKind {
  BoundedF,      // P=? [ F<=B phi ]
  BoundedG,      // P=? [ G<=B phi ]
  BoundedU,      // P=? [ phi1 U<=B phi2 ]
  SteadyProb,    // S=? [ phi ]
  CumulReward,   // R{"name"}=? [ C<=B ]
  SteadyReward,  // R{"name"}=? [ S ]
};

struct Property {
  PropertyKind kind;
  std::string text;        // original source
  std::string reward;      // reward kinds
  ExprPtr pred1, pred2;    // boolean predicates over model variables
  double bound = 0;        // folded time bound, bounded kinds

  bool is_bounded() const {
    return kind == PropertyKind::BoundedF || kind == PropertyKind::BoundedG ||
           kind == PropertyKind::BoundedU || kind == PropertyKind::CumulReward;
  }
  bool is_reward() const {
    return kind == PropertyKind::CumulReward || kind == PropertyKind::SteadyReward;
  }
};

struct QueryResult {
  double value = 0;
  std::string method;
  long iterations = 0;
  double wall_seconds = 0;
};

// Recognizes exactly the six shapes above; whitespace-insensitive; the time
// bound may be any constant expression over the model's constants plus
// `extra` (e.g. `--const T=...`). Predicates must typecheck as bool against
// the model's variables; reward names must exist.
Property parse_property(std::string_view text, const ModelIR& model, const Env& extra = {});

QueryResult evaluate(const StateSpace& space, const Property& prop,
                     const SolverOptions& opts = {});

// One property per line; `//` comments and blank lines ignored.
std::vector<Property> parse_property_file(std::string_view content, const ModelIR& model,
                                          const Env& extra = {});

}  // namespace gridmc
