#include "gridmc/expr.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace gridmc {

std::string to_string(Type t) {
  switch (t) {
    case Type::Int: return "int";
    case Type::Real: return "double";
    case Type::Bool: return "bool";
  }
  return "?";
}

std::string to_string(const Value& v) {
  if (v.is_bool()) return v.as_bool() ? "true" : "false";
  if (v.is_int()) return std::to_string(v.as_int());
  std::ostringstream os;
  os.precision(17);
  os << v.as_real();
  return os.str();
}

const char* op_symbol(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Eq: return "=";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "&";
    case Op::Or: return "|";
  }
  return "?";
}

ExprPtr make_int(std::int64_t v) { return std::make_shared<Expr>(Expr{IntLit{v}}); }
ExprPtr make_real(double v) { return std::make_shared<Expr>(Expr{RealLit{v}}); }
ExprPtr make_bool(bool v) { return std::make_shared<Expr>(Expr{BoolLit{v}}); }
ExprPtr make_ident(std::string name) {
  return std::make_shared<Expr>(Expr{Ident{std::move(name)}});
}
ExprPtr make_not(ExprPtr c) { return std::make_shared<Expr>(Expr{Not{std::move(c)}}); }
ExprPtr make_neg(ExprPtr c) { return std::make_shared<Expr>(Expr{Neg{std::move(c)}}); }
ExprPtr make_binop(Op op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<Expr>(Expr{BinOp{op, std::move(lhs), std::move(rhs)}});
}
ExprPtr make_value(const Value& v) {
  if (v.is_bool()) return make_bool(v.as_bool());
  if (v.is_int()) return make_int(v.as_int());
  return make_real(v.as_real());
}

namespace {

bool is_cmp(Op op) {
  return op == Op::Eq || op == Op::Ne || op == Op::Lt || op == Op::Le || op == Op::Gt ||
         op == Op::Ge;
}

[[noreturn]] void type_mismatch(const Expr& e, const char* what) {
  throw EvalError(std::string(what) + " in `" + to_string(e) + "`");
}

Value eval_binop(const Expr& whole, Op op, const Value& a, const Value& b) {
  if (op == Op::And || op == Op::Or) {
    if (!a.is_bool() || !b.is_bool()) type_mismatch(whole, "boolean operator on non-boolean");
    return op == Op::And ? Value(a.as_bool() && b.as_bool()) : Value(a.as_bool() || b.as_bool());
  }
  if (is_cmp(op)) {
    if (!a.is_numeric() || !b.is_numeric()) type_mismatch(whole, "comparison of non-numeric");
    double x = a.as_real(), y = b.as_real();
    switch (op) {
      case Op::Eq: return x == y;
      case Op::Ne: return x != y;
      case Op::Lt: return x < y;
      case Op::Le: return x <= y;
      case Op::Gt: return x > y;
      default: return x >= y;
    }
  }
  if (!a.is_numeric() || !b.is_numeric()) type_mismatch(whole, "arithmetic on non-numeric");
  if (op == Op::Div) {
    double d = b.as_real();
    if (d == 0.0) throw EvalError("division by zero in `" + to_string(whole) + "`");
    return a.as_real() / d;  // division is always real-valued
  }
  if (a.is_int() && b.is_int()) {
    std::int64_t x = a.as_int(), y = b.as_int();
    switch (op) {
      case Op::Add: return x + y;
      case Op::Sub: return x - y;
      default: return x * y;
    }
  }
  double x = a.as_real(), y = b.as_real();
  switch (op) {
    case Op::Add: return x + y;
    case Op::Sub: return x - y;
    default: return x * y;
  }
}

}  // namespace

Value eval(const Expr& e, const Env& env) {
  struct V {
    const Env& env;
    const Expr& whole;
    Value operator()(const IntLit& n) const { return Value(n.v); }
    Value operator()(const RealLit& n) const { return Value(n.v); }
    Value operator()(const BoolLit& n) const { return Value(n.v); }
    Value operator()(const Ident& n) const {
      auto it = env.find(n.name);
      if (it == env.end()) throw EvalError("unbound identifier `" + n.name + "`");
      return it->second;
    }
    Value operator()(const Not& n) const {
      Value c = eval(*n.c, env);
      if (!c.is_bool()) type_mismatch(whole, "logical not on non-boolean");
      return !c.as_bool();
    }
    Value operator()(const Neg& n) const {
      Value c = eval(*n.c, env);
      if (!c.is_numeric()) type_mismatch(whole, "negation of non-numeric");
      if (c.is_int()) return -c.as_int();
      return -c.as_real();
    }
    Value operator()(const BinOp& n) const {
      return eval_binop(whole, n.op, eval(*n.lhs, env), eval(*n.rhs, env));
    }
  };
  return std::visit(V{env, e}, e.node);
}

Type typecheck(const Expr& e, const std::map<std::string, Type, std::less<>>& vars) {
  struct V {
    const std::map<std::string, Type, std::less<>>& vars;
    const Expr& whole;
    Type operator()(const IntLit&) const { return Type::Int; }
    Type operator()(const RealLit&) const { return Type::Real; }
    Type operator()(const BoolLit&) const { return Type::Bool; }
    Type operator()(const Ident& n) const {
      auto it = vars.find(n.name);
      if (it == vars.end()) throw TypeError("unknown identifier `" + n.name + "`");
      return it->second;
    }
    Type operator()(const Not& n) const {
      if (typecheck(*n.c, vars) != Type::Bool)
        throw TypeError("`!` needs a boolean operand at `" + to_string(whole) + "`");
      return Type::Bool;
    }
    Type operator()(const Neg& n) const {
      Type t = typecheck(*n.c, vars);
      if (t == Type::Bool)
        throw TypeError("unary `-` needs a numeric operand at `" + to_string(whole) + "`");
      return t;
    }
    Type operator()(const BinOp& n) const {
      Type a = typecheck(*n.lhs, vars), b = typecheck(*n.rhs, vars);
      if (n.op == Op::And || n.op == Op::Or) {
        if (a != Type::Bool || b != Type::Bool)
          throw TypeError("boolean operator on non-boolean at `" + to_string(whole) + "`");
        return Type::Bool;
      }
      if (is_cmp(n.op)) {
        if (a == Type::Bool || b == Type::Bool)
          throw TypeError("comparison of non-numeric at `" + to_string(whole) + "`");
        return Type::Bool;
      }
      if (a == Type::Bool || b == Type::Bool)
        throw TypeError("arithmetic on non-numeric at `" + to_string(whole) + "`");
      if (n.op == Op::Div) return Type::Real;
      return (a == Type::Real || b == Type::Real) ? Type::Real : Type::Int;
    }
  };
  return std::visit(V{vars, e}, e.node);
}

namespace {

ExprPtr fold_rec(const ExprPtr& e, const Env& consts,
                 const std::map<std::string, ExprPtr, std::less<>>& formulas,
                 std::set<std::string>& inlining) {
  struct V {
    const ExprPtr& self;
    const Env& consts;
    const std::map<std::string, ExprPtr, std::less<>>& formulas;
    std::set<std::string>& inlining;

    ExprPtr rec(const ExprPtr& c) const { return fold_rec(c, consts, formulas, inlining); }

    ExprPtr operator()(const IntLit&) const { return self; }
    ExprPtr operator()(const RealLit&) const { return self; }
    ExprPtr operator()(const BoolLit&) const { return self; }
    ExprPtr operator()(const Ident& n) const {
      if (auto f = formulas.find(n.name); f != formulas.end()) {
        if (!inlining.insert(n.name).second)
          throw EvalError("cyclic formula definition involving `" + n.name + "`");
        ExprPtr r = rec(f->second);
        inlining.erase(n.name);
        return r;
      }
      if (auto c = consts.find(n.name); c != consts.end()) return make_value(c->second);
      return self;
    }
    ExprPtr operator()(const Not& n) const {
      ExprPtr c = rec(n.c);
      if (std::holds_alternative<BoolLit>(c->node))
        return make_bool(!std::get<BoolLit>(c->node).v);
      return make_not(c);
    }
    ExprPtr operator()(const Neg& n) const {
      ExprPtr c = rec(n.c);
      if (std::holds_alternative<IntLit>(c->node))
        return make_int(-std::get<IntLit>(c->node).v);
      if (std::holds_alternative<RealLit>(c->node))
        return make_real(-std::get<RealLit>(c->node).v);
      return make_neg(c);
    }
    ExprPtr operator()(const BinOp& n) const {
      ExprPtr a = rec(n.lhs), b = rec(n.rhs);
      auto lit = [](const ExprPtr& x) {
        return std::holds_alternative<IntLit>(x->node) ||
               std::holds_alternative<RealLit>(x->node) ||
               std::holds_alternative<BoolLit>(x->node);
      };
      if (lit(a) && lit(b)) return make_value(eval(Expr{BinOp{n.op, a, b}}, Env{}));
      return make_binop(n.op, a, b);
    }
  };
  return std::visit(V{e, consts, formulas, inlining}, e->node);
}

}  // namespace

ExprPtr fold_constants(const ExprPtr& e, const Env& consts,
                       const std::map<std::string, ExprPtr, std::less<>>& formulas) {
  std::set<std::string> inlining;
  return fold_rec(e, consts, formulas, inlining);
}

namespace {

int precedence(const Expr& e) {
  struct V {
    int operator()(const BinOp& n) const {
      switch (n.op) {
        case Op::Or: return 1;
        case Op::And: return 2;
        case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: return 4;
        case Op::Add: case Op::Sub: return 5;
        default: return 6;
      }
    }
    int operator()(const Not&) const { return 7; }  // unary, like Neg
    int operator()(const Neg&) const { return 7; }
    // negative literals render with a leading minus, so they bind like Neg
    int operator()(const IntLit& n) const { return n.v < 0 ? 7 : 100; }
    int operator()(const RealLit& n) const { return n.v < 0 ? 7 : 100; }
    int operator()(const BoolLit&) const { return 100; }
    int operator()(const Ident&) const { return 100; }
  };
  return std::visit(V{}, e.node);
}

void print(const Expr& e, std::string& out) {
  struct V {
    const Expr& self;
    std::string& out;
    void child(const ExprPtr& c, bool strict) const {
      bool paren = precedence(*c) < precedence(self) + (strict ? 1 : 0);
      if (paren) out += '(';
      print(*c, out);
      if (paren) out += ')';
    }
    void operator()(const IntLit& n) const { out += std::to_string(n.v); }
    void operator()(const RealLit& n) const { out += to_string(Value(n.v)); }
    void operator()(const BoolLit& n) const { out += n.v ? "true" : "false"; }
    void operator()(const Ident& n) const { out += n.name; }
    void operator()(const Not& n) const { out += '!'; child(n.c, true); }
    void operator()(const Neg& n) const { out += '-'; child(n.c, true); }
    void operator()(const BinOp& n) const {
      child(n.lhs, false);
      out += op_symbol(n.op);
      child(n.rhs, true);  // left-associative
    }
  };
  std::visit(V{e, out}, e.node);
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

namespace {

void collect_free(const Expr& e, std::vector<std::string>& out, std::set<std::string>& seen) {
  struct V {
    std::vector<std::string>& out;
    std::set<std::string>& seen;
    void operator()(const Ident& n) const {
      if (seen.insert(n.name).second) out.push_back(n.name);
    }
    void operator()(const Not& n) const { collect_free(*n.c, out, seen); }
    void operator()(const Neg& n) const { collect_free(*n.c, out, seen); }
    void operator()(const BinOp& n) const {
      collect_free(*n.lhs, out, seen);
      collect_free(*n.rhs, out, seen);
    }
    void operator()(const IntLit&) const {}
    void operator()(const RealLit&) const {}
    void operator()(const BoolLit&) const {}
  };
  std::visit(V{out, seen}, e.node);
}

}  // namespace

std::vector<std::string> free_identifiers(const Expr& e) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  collect_free(e, out, seen);
  return out;
}

}  // namespace gridmc
