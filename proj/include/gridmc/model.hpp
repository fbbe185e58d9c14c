#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridmc/expr.hpp"

namespace gridmc {

struct ConstDecl {
  std::string name;
  Type declared;         // int or double
  ExprPtr value;         // null if declared without a value (must be overridden)
  bool overridden = false;
  int line = 0;
};

struct FormulaDecl {
  std::string name;
  ExprPtr body;
  int line = 0;
};

struct VarDecl {
  std::string name;
  bool is_bool = false;
  ExprPtr lo, hi;        // null for bool
  ExprPtr init;
  int line = 0;
};

struct Update {
  std::string target;
  ExprPtr value;
};

struct Command {
  std::string label;     // empty = unlabeled
  ExprPtr guard;
  ExprPtr rate;          // null = implicit rate 1
  std::vector<Update> updates;  // empty = identity update (`true`)
  int line = 0;
};

struct Module {
  std::string name;
  std::vector<VarDecl> locals;
  std::vector<Command> commands;
  int line = 0;
};

struct RewardStateItem {
  ExprPtr guard, value;
  int line = 0;
};

struct RewardTransItem {
  std::string label;     // empty = unlabeled marker `[]`
  ExprPtr guard, value;
  int line = 0;
};

struct RewardStructure {
  std::string name;
  std::vector<RewardStateItem> state_items;
  std::vector<RewardTransItem> trans_items;
  int line = 0;
};

struct ModelIR {
  std::vector<ConstDecl> constants;
  std::vector<FormulaDecl> formulas;
  std::vector<VarDecl> globals;
  std::vector<Module> modules;
  std::vector<RewardStructure> rewards;

  const Module* find_module(std::string_view name) const;
  const RewardStructure* find_reward(std::string_view name) const;
  const ConstDecl* find_constant(std::string_view name) const;

  // Evaluated values of all constants, in declaration order.
  Env constant_env() const;
  // name -> inlinable body, for fold_constants.
  std::map<std::string, ExprPtr, std::less<>> formula_table() const;
  // Static types of all state variables (globals + every module's locals).
  std::map<std::string, Type, std::less<>> variable_types() const;
  // Every action label, in first-declaration order.
  std::vector<std::string> action_labels() const;
};

struct Diagnostic {
  std::string message;
  int line = 0;
};

// Structural checks beyond the grammar: write ownership (module-local
// commands write only their own locals, globals only from unlabeled
// commands), update type compatibility, reward transition labels declared by
// some command, range bounds foldable to int constants, init within range.
std::vector<Diagnostic> validate(const ModelIR& m);

// Round-trippable rendering in the input language.
std::string pretty_print(const ModelIR& m);

}  // namespace gridmc
