#include "gridmc/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace gridmc {

const Module* ModelIR::find_module(std::string_view name) const {
  for (const auto& m : modules)
    if (m.name == name) return &m;
  return nullptr;
}

const RewardStructure* ModelIR::find_reward(std::string_view name) const {
  for (const auto& r : rewards)
    if (r.name == name) return &r;
  return nullptr;
}

const ConstDecl* ModelIR::find_constant(std::string_view name) const {
  for (const auto& c : constants)
    if (c.name == name) return &c;
  return nullptr;
}

Env ModelIR::constant_env() const {
  Env env;
  auto formulas = formula_table();
  for (const auto& d : constants) {
    if (!d.value) throw EvalError("constant `" + d.name + "` has no value");
    Value v = eval(*fold_constants(d.value, env, formulas), {});
    if (d.declared == Type::Real && v.is_int()) v = Value(v.as_real());
    if (d.declared == Type::Int && v.is_real())
      throw EvalError("constant `" + d.name + "` declared int but has real value");
    env[d.name] = v;
  }
  return env;
}

std::map<std::string, ExprPtr, std::less<>> ModelIR::formula_table() const {
  std::map<std::string, ExprPtr, std::less<>> t;
  for (const auto& f : formulas) t[f.name] = f.body;
  return t;
}

std::map<std::string, Type, std::less<>> ModelIR::variable_types() const {
  std::map<std::string, Type, std::less<>> t;
  for (const auto& v : globals) t[v.name] = v.is_bool ? Type::Bool : Type::Int;
  for (const auto& m : modules)
    for (const auto& v : m.locals) t[v.name] = v.is_bool ? Type::Bool : Type::Int;
  return t;
}

std::vector<std::string> ModelIR::action_labels() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& m : modules)
    for (const auto& c : m.commands)
      if (!c.label.empty() && seen.insert(c.label).second) out.push_back(c.label);
  return out;
}

std::vector<Diagnostic> validate(const ModelIR& m) {
  std::vector<Diagnostic> out;
  auto diag = [&](std::string msg, int line) { out.push_back({std::move(msg), line}); };

  // name uniqueness across constants, formulas, variables, modules
  std::set<std::string> names;
  auto unique = [&](const std::string& n, const char* what, int line) {
    if (!names.insert(n).second) diag(std::string(what) + " `" + n + "` redeclares a name", line);
  };
  for (const auto& c : m.constants) unique(c.name, "constant", c.line);
  for (const auto& f : m.formulas) unique(f.name, "formula", f.line);
  for (const auto& v : m.globals) unique(v.name, "global variable", v.line);
  for (const auto& mod : m.modules) {
    unique(mod.name, "module", mod.line);
    for (const auto& v : mod.locals) unique(v.name, "variable", v.line);
  }

  Env consts;
  try {
    consts = m.constant_env();
  } catch (const std::exception& e) {
    diag(e.what(), 0);
    return out;  // nothing else is checkable without constant values
  }
  auto formulas = m.formula_table();
  auto var_types = m.variable_types();

  auto types_with_vars = [&] {
    std::map<std::string, Type, std::less<>> t = var_types;
    for (const auto& [k, v] : consts) t[k] = v.type();
    return t;
  }();

  auto check_type = [&](const ExprPtr& e, Type want, const std::string& where, int line,
                        bool numeric_ok = false) {
    try {
      ExprPtr folded = fold_constants(e, consts, formulas);
      Type t = typecheck(*folded, var_types);
      if (numeric_ok && t != Type::Bool) return;
      if (!numeric_ok && want == Type::Real && t == Type::Int) return;  // int promotes
      if (t != want)
        diag(where + " has type " + to_string(t) + ", expected " + to_string(want), line);
    } catch (const std::exception& e2) {
      diag(where + ": " + e2.what(), line);
    }
  };

  // variable domains and initial values
  auto check_var = [&](const VarDecl& v) {
    if (v.is_bool) {
      check_type(v.init, Type::Bool, "init of `" + v.name + "`", v.line);
      return;
    }
    std::int64_t lo = 0, hi = 0;
    bool bounds_ok = true;
    for (const auto* b : {&v.lo, &v.hi}) {
      ExprPtr folded = fold_constants(*b, consts, formulas);
      if (!std::holds_alternative<IntLit>(folded->node)) {
        diag("range bound of `" + v.name + "` does not fold to an int constant", v.line);
        bounds_ok = false;
      }
    }
    if (!bounds_ok) return;
    lo = std::get<IntLit>(fold_constants(v.lo, consts, formulas)->node).v;
    hi = std::get<IntLit>(fold_constants(v.hi, consts, formulas)->node).v;
    if (lo > hi) diag("empty range [" + std::to_string(lo) + ".." + std::to_string(hi) +
                      "] for `" + v.name + "`", v.line);
    ExprPtr init = fold_constants(v.init, consts, formulas);
    if (std::holds_alternative<IntLit>(init->node)) {
      auto iv = std::get<IntLit>(init->node).v;
      if (iv < lo || iv > hi)
        diag("init " + std::to_string(iv) + " outside [" + std::to_string(lo) + ".." +
             std::to_string(hi) + "] for `" + v.name + "`", v.line);
    } else {
      diag("init of `" + v.name + "` does not fold to an int constant", v.line);
    }
  };
  for (const auto& v : m.globals) check_var(v);
  for (const auto& mod : m.modules)
    for (const auto& v : mod.locals) check_var(v);

  std::set<std::string> global_names, declared_labels;
  for (const auto& v : m.globals) global_names.insert(v.name);

  for (const auto& mod : m.modules) {
    std::set<std::string> own;
    for (const auto& v : mod.locals) own.insert(v.name);
    for (const auto& c : mod.commands) {
      if (!c.label.empty()) declared_labels.insert(c.label);
      check_type(c.guard, Type::Bool, "guard in module " + mod.name, c.line);
      if (c.rate) check_type(c.rate, Type::Real, "rate in module " + mod.name, c.line);
      for (const auto& u : c.updates) {
        auto vt = var_types.find(u.target);
        if (vt == var_types.end()) {
          diag("update target `" + u.target + "` is not a variable", c.line);
          continue;
        }
        if (own.count(u.target)) {
          // fine: own local
        } else if (global_names.count(u.target)) {
          if (!c.label.empty())
            diag("module " + mod.name + " writes global `" + u.target +
                 "` from a labeled command", c.line);
        } else {
          diag("module " + mod.name + " writes `" + u.target + "`, a local of another module",
               c.line);
        }
        check_type(u.value, vt->second, "update of `" + u.target + "`", c.line);
      }
      std::set<std::string> seen;
      for (const auto& u : c.updates)
        if (!seen.insert(u.target).second)
          diag("variable `" + u.target + "` updated twice in one command", c.line);
    }
  }

  for (const auto& r : m.rewards) {
    for (const auto& it : r.state_items) {
      check_type(it.guard, Type::Bool, "state reward guard in \"" + r.name + "\"", it.line);
      check_type(it.value, Type::Real, "state reward value in \"" + r.name + "\"", it.line, true);
    }
    for (const auto& it : r.trans_items) {
      if (!it.label.empty() && !declared_labels.count(it.label))
        diag("reward \"" + r.name + "\" references action `" + it.label +
             "` that no command declares", it.line);
      check_type(it.guard, Type::Bool, "transition reward guard in \"" + r.name + "\"", it.line);
      check_type(it.value, Type::Real, "transition reward value in \"" + r.name + "\"", it.line,
                 true);
    }
  }
  return out;
}

namespace {

void print_var(std::ostringstream& os, const VarDecl& v, const char* indent) {
  os << indent << v.name << " : ";
  if (v.is_bool) os << "bool";
  else os << "[" << to_string(*v.lo) << ".." << to_string(*v.hi) << "]";
  os << " init " << to_string(*v.init) << ";\n";
}

void print_command(std::ostringstream& os, const Command& c) {
  os << "  [" << c.label << "] " << to_string(*c.guard) << " -> ";
  if (c.rate) os << to_string(*c.rate) << ": ";
  if (c.updates.empty()) {
    os << "true";
  } else {
    for (std::size_t i = 0; i < c.updates.size(); ++i) {
      if (i) os << " & ";
      os << "(" << c.updates[i].target << "'=" << to_string(*c.updates[i].value) << ")";
    }
  }
  os << ";\n";
}

}  // namespace

std::string pretty_print(const ModelIR& m) {
  std::ostringstream os;
  os << "ctmc\n\n";
  for (const auto& d : m.constants) {
    os << "const " << (d.declared == Type::Int ? "int " : "double ") << d.name;
    if (d.value) os << " = " << to_string(*d.value);
    os << ";\n";
  }
  if (!m.constants.empty()) os << "\n";
  for (const auto& f : m.formulas) os << "formula " << f.name << " = " << to_string(*f.body) << ";\n";
  if (!m.formulas.empty()) os << "\n";
  for (const auto& v : m.globals) {
    os << "global ";
    print_var(os, v, "");
  }
  if (!m.globals.empty()) os << "\n";
  for (const auto& mod : m.modules) {
    os << "module " << mod.name << "\n";
    for (const auto& v : mod.locals) print_var(os, v, "  ");
    for (const auto& c : mod.commands) print_command(os, c);
    os << "endmodule\n\n";
  }
  for (const auto& r : m.rewards) {
    os << "rewards \"" << r.name << "\"\n";
    for (const auto& it : r.state_items)
      os << "  " << to_string(*it.guard) << " : " << to_string(*it.value) << ";\n";
    for (const auto& it : r.trans_items)
      os << "  [" << it.label << "] " << to_string(*it.guard) << " : " << to_string(*it.value)
         << ";\n";
    os << "endrewards\n\n";
  }
  return os.str();
}

}  // namespace gridmc
