#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gridmc {

enum class Type { Int, Real, Bool };

std::string to_string(Type t);

// Runtime value: int, real, or bool. Ints promote to real where a real is
// expected; bools never convert.
class Value {
public:
  Value() : v_(std::int64_t{0}) {}
  Value(std::int64_t i) : v_(i) {}
  Value(int i) : v_(std::int64_t{i}) {}
  Value(double d) : v_(d) {}
  Value(bool b) : v_(b) {}

  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_real() const { return std::holds_alternative<double>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_numeric() const { return !is_bool(); }

  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }
  double as_real() const {
    if (is_int()) return static_cast<double>(as_int());
    return std::get<double>(v_);
  }

  Type type() const {
    return is_bool() ? Type::Bool : (is_int() ? Type::Int : Type::Real);
  }

  bool operator==(const Value& o) const { return v_ == o.v_; }

private:
  std::variant<std::int64_t, double, bool> v_;
};

std::string to_string(const Value& v);

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Identifier -> value bindings. Transparent comparator so string_view lookups
// don't allocate.
using Env = std::map<std::string, Value, std::less<>>;

enum class Op { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

const char* op_symbol(Op op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct IntLit { std::int64_t v; };
struct RealLit { double v; };
struct BoolLit { bool v; };
struct Ident { std::string name; };
struct Not { ExprPtr c; };
struct Neg { ExprPtr c; };
struct BinOp {
  Op op;
  ExprPtr lhs, rhs;
};

struct Expr {
  std::variant<IntLit, RealLit, BoolLit, Ident, Not, Neg, BinOp> node;
};

ExprPtr make_int(std::int64_t v);
ExprPtr make_real(double v);
ExprPtr make_bool(bool v);
ExprPtr make_ident(std::string name);
ExprPtr make_not(ExprPtr c);
ExprPtr make_neg(ExprPtr c);
ExprPtr make_binop(Op op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_value(const Value& v);

// Deterministic evaluation. `/` always yields a real; `=`/`!=` on numerics
// compare after int->real promotion. Throws EvalError on unbound
// identifiers, division by zero (naming the offending sub-expression), and
// operand type mismatches.
Value eval(const Expr& e, const Env& env);

// Static type of `e` given types for its free identifiers. `/` types as Real
// regardless of operand types. Throws TypeError with the path to the
// offending node.
Type typecheck(const Expr& e, const std::map<std::string, Type, std::less<>>& vars);

// Inline formulas, substitute constants, and fold every subtree whose
// operands are literal. The result's free identifiers are exactly those not
// bound by `consts` or `formulas` (i.e. state variables). Detects cyclic
// formula definitions.
ExprPtr fold_constants(const ExprPtr& e, const Env& consts,
                       const std::map<std::string, ExprPtr, std::less<>>& formulas = {});

// Parenthesized round-trippable rendering.
std::string to_string(const Expr& e);

// Free identifiers, in first-occurrence order.
std::vector<std::string> free_identifiers(const Expr& e);

}  // namespace gridmc
