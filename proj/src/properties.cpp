#include "gridmc/properties.hpp"

#include <chrono>
#include <sstream>

#include "gridmc/parser.hpp"
#include "gridmc/parser_detail.hpp"

namespace gridmc {

namespace {

using detail::Cursor;
using detail::Tok;

double fold_bound(const ExprPtr& e, const ModelIR& model, const Env& extra) {
  Env consts = model.constant_env();
  for (const auto& [k, v] : extra) consts[k] = v;
  ExprPtr folded = fold_constants(e, consts, model.formula_table());
  auto free = free_identifiers(*folded);
  if (!free.empty())
    throw ParseError("time bound references unbound constant `" + free.front() +
                     "` (supply it with --const)", 0, 0);
  Value v = eval(*folded, {});
  if (v.is_bool()) throw ParseError("time bound is boolean, expected numeric", 0, 0);
  double b = v.as_real();
  if (b < 0) throw ParseError("time bound folds to a negative value", 0, 0);
  return b;
}

ExprPtr check_pred(const ExprPtr& e, const ModelIR& model) {
  Env consts = model.constant_env();
  ExprPtr folded = fold_constants(e, consts, model.formula_table());
  Type t = typecheck(*folded, model.variable_types());  // throws with context
  if (t != Type::Bool) throw ParseError("predicate has type " + to_string(t) + ", expected bool", 0, 0);
  return folded;
}

}  // namespace

Property parse_property(std::string_view text, const ModelIR& model, const Env& extra) {
  Cursor c{detail::tokenize(text), 0};
  Property p;
  p.text = std::string(text);

  auto expect_done = [&] {
    if (c.peek().kind != Tok::End) {
      const auto& t = c.peek();
      throw ParseError("trailing input after property: `" + t.text + "`", t.line, t.col);
    }
  };

  if (c.accept("P")) {
    c.expect("=");
    c.expect("?");
    c.expect("[");
    if (c.accept("F")) {
      c.expect("<=");
      ExprPtr bound = detail::parse_expr(c);
      // the bound stops where the predicate starts; parse_expr is greedy, so
      // split on the fact that `F<=B phi` has no operator between B and phi
      p.kind = PropertyKind::BoundedF;
      p.bound = fold_bound(bound, model, extra);
      p.pred1 = check_pred(detail::parse_expr(c), model);
      c.expect("]");
      expect_done();
      return p;
    }
    if (c.accept("G")) {
      c.expect("<=");
      ExprPtr bound = detail::parse_expr(c);
      p.kind = PropertyKind::BoundedG;
      p.bound = fold_bound(bound, model, extra);
      p.pred1 = check_pred(detail::parse_expr(c), model);
      c.expect("]");
      expect_done();
      return p;
    }
    // P=? [ phi1 U<=B phi2 ]
    p.kind = PropertyKind::BoundedU;
    p.pred1 = check_pred(detail::parse_expr(c), model);
    c.expect("U");
    c.expect("<=");
    ExprPtr bound = detail::parse_expr(c);
    p.bound = fold_bound(bound, model, extra);
    p.pred2 = check_pred(detail::parse_expr(c), model);
    c.expect("]");
    expect_done();
    return p;
  }
  if (c.accept("S")) {
    c.expect("=");
    c.expect("?");
    c.expect("[");
    p.kind = PropertyKind::SteadyProb;
    p.pred1 = check_pred(detail::parse_expr(c), model);
    c.expect("]");
    expect_done();
    return p;
  }
  if (c.accept("R")) {
    c.expect("{");
    const auto& t = c.peek();
    if (t.kind != Tok::String)
      throw ParseError("R needs a quoted reward name, found `" + t.text + "`", t.line, t.col);
    p.reward = t.text;
    c.next();
    c.expect("}");
    c.expect("=");
    c.expect("?");
    c.expect("[");
    if (c.accept("S")) {
      p.kind = PropertyKind::SteadyReward;
    } else {
      c.expect("C");
      c.expect("<=");
      p.kind = PropertyKind::CumulReward;
      p.bound = fold_bound(detail::parse_expr(c), model, extra);
    }
    c.expect("]");
    expect_done();
    if (!model.find_reward(p.reward))
      throw ParseError("unknown reward structure \"" + p.reward + "\"", 0, 0);
    return p;
  }
  const auto& t = c.peek();
  throw ParseError("expected P=?, S=? or R{...}=?, found `" + t.text + "`", t.line, t.col);
}

std::vector<Property> parse_property_file(std::string_view content, const ModelIR& model,
                                          const Env& extra) {
  std::vector<Property> out;
  std::istringstream is{std::string(content)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto comment = line.find("//");
    if (comment != std::string::npos) line.erase(comment);
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) continue;
    try {
      out.push_back(parse_property(line, model, extra));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno, 0);
    }
  }
  return out;
}

QueryResult evaluate(const StateSpace& space, const Property& prop, const SolverOptions& opts) {
  QueryResult qr;
  SolveInfo info;
  auto start = std::chrono::steady_clock::now();
  switch (prop.kind) {
    case PropertyKind::BoundedF:
      qr.value = bounded_reachability(space, space.satisfying(prop.pred1), prop.bound, opts, &info);
      break;
    case PropertyKind::BoundedG: {
      auto target = space.satisfying(prop.pred1);
      target.flip();
      qr.value = 1.0 - bounded_reachability(space, target, prop.bound, opts, &info);
      break;
    }
    case PropertyKind::BoundedU:
      qr.value = bounded_until(space, space.satisfying(prop.pred1), space.satisfying(prop.pred2),
                               prop.bound, opts, &info);
      break;
    case PropertyKind::SteadyProb: {
      auto pi = steady_state(space, opts, &info);
      auto sat = space.satisfying(prop.pred1);
      double v = 0;
      for (std::uint32_t s = 0; s < space.num_states(); ++s)
        if (sat[s]) v += pi[s];
      qr.value = v;
      break;
    }
    case PropertyKind::CumulReward:
      qr.value = cumulative_expected_reward(space, prop.reward, prop.bound, opts, &info);
      break;
    case PropertyKind::SteadyReward:
      qr.value = long_run_expected_reward(space, prop.reward, opts, &info);
      break;
  }
  auto end = std::chrono::steady_clock::now();
  qr.method = info.method;
  qr.iterations = info.iterations;
  qr.wall_seconds = std::chrono::duration<double>(end - start).count();
  return qr;
}

}  // namespace gridmc
