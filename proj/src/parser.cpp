#include "gridmc/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>

#include "gridmc/parser_detail.hpp"

namespace gridmc {

ParseError::ParseError(std::string msg, int line_, int col_)
    : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                         std::to_string(col_) + ": " + std::move(msg)),
      line(line_), col(col_) {}

namespace detail {

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> toks;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') { ++line; col = 1; } else ++col;
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) { advance(1); continue; }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      std::size_t j = i;
      while (j < text.size() && text[j] != '\n') ++j;
      advance(j - i);
      continue;
    }
    int tl = line, tc = col;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i;
      bool real = false;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && text[j] == '.' &&
          !(j + 1 < text.size() && text[j + 1] == '.')) {  // don't eat `..`
        real = true;
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          real = true;
          ++k;
          while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
          j = k;
        }
      }
      toks.push_back({real ? Tok::Real : Tok::Int, std::string(text.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      toks.push_back({Tok::Ident, std::string(text.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"') ++j;
      if (j == text.size()) throw ParseError("unterminated string", tl, tc);
      toks.push_back({Tok::String, std::string(text.substr(i + 1, j - i - 1)), tl, tc});
      advance(j + 1 - i);
      continue;
    }
    auto two = text.substr(i, 2);
    if (two == "->" || two == ".." || two == "!=" || two == "<=" || two == ">=") {
      toks.push_back({Tok::Punct, std::string(two), tl, tc});
      advance(2);
      continue;
    }
    if (std::string_view("[](){};:,'=<>&|!+-*/?").find(c) != std::string_view::npos) {
      toks.push_back({Tok::Punct, std::string(1, c), tl, tc});
      advance(1);
      continue;
    }
    throw ParseError(std::string("unexpected character `") + c + "`", tl, tc);
  }
  toks.push_back({Tok::End, "", line, col});
  return toks;
}

const Token& Cursor::peek(int ahead) const {
  std::size_t j = std::min(pos + static_cast<std::size_t>(ahead), toks.size() - 1);
  return toks[j];
}

const Token& Cursor::next() { return toks[std::min(pos++, toks.size() - 1)]; }

bool Cursor::accept(std::string_view text) {
  const Token& t = peek();
  if ((t.kind == Tok::Punct || t.kind == Tok::Ident) && t.text == text) {
    ++pos;
    return true;
  }
  return false;
}

void Cursor::expect(std::string_view text) {
  if (!accept(text)) {
    const Token& t = peek();
    throw ParseError("expected `" + std::string(text) + "`, found `" + t.text + "`", t.line,
                     t.col);
  }
}

std::string Cursor::expect_ident() {
  const Token& t = peek();
  if (t.kind != Tok::Ident)
    throw ParseError("expected identifier, found `" + t.text + "`", t.line, t.col);
  ++pos;
  return t.text;
}

namespace {

ExprPtr parse_or(Cursor& c);

ExprPtr parse_primary(Cursor& c) {
  const Token& t = c.peek();
  switch (t.kind) {
    case Tok::Int: {
      std::int64_t v = 0;
      std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      c.next();
      return make_int(v);
    }
    case Tok::Real: {
      c.next();
      return make_real(std::stod(t.text));
    }
    case Tok::Ident:
      c.next();
      if (t.text == "true") return make_bool(true);
      if (t.text == "false") return make_bool(false);
      return make_ident(t.text);
    default:
      if (c.accept("(")) {
        ExprPtr e = parse_or(c);
        c.expect(")");
        return e;
      }
      throw ParseError("expected expression, found `" + t.text + "`", t.line, t.col);
  }
}

ExprPtr parse_unary(Cursor& c) {
  if (c.accept("-")) return make_neg(parse_unary(c));
  if (c.accept("!")) return make_not(parse_unary(c));
  return parse_primary(c);
}

ExprPtr parse_mul(Cursor& c) {
  ExprPtr e = parse_unary(c);
  for (;;) {
    if (c.accept("*")) e = make_binop(Op::Mul, e, parse_unary(c));
    else if (c.accept("/")) e = make_binop(Op::Div, e, parse_unary(c));
    else return e;
  }
}

ExprPtr parse_add(Cursor& c) {
  ExprPtr e = parse_mul(c);
  for (;;) {
    if (c.accept("+")) e = make_binop(Op::Add, e, parse_mul(c));
    else if (c.accept("-")) e = make_binop(Op::Sub, e, parse_mul(c));
    else return e;
  }
}

ExprPtr parse_rel(Cursor& c) {
  ExprPtr e = parse_add(c);
  for (;;) {
    if (c.accept("=")) e = make_binop(Op::Eq, e, parse_add(c));
    else if (c.accept("!=")) e = make_binop(Op::Ne, e, parse_add(c));
    else if (c.accept("<=")) e = make_binop(Op::Le, e, parse_add(c));
    else if (c.accept(">=")) e = make_binop(Op::Ge, e, parse_add(c));
    else if (c.accept("<")) e = make_binop(Op::Lt, e, parse_add(c));
    else if (c.accept(">")) e = make_binop(Op::Gt, e, parse_add(c));
    else return e;
  }
}

ExprPtr parse_and(Cursor& c) {
  ExprPtr e = parse_rel(c);
  while (c.accept("&")) e = make_binop(Op::And, e, parse_rel(c));
  return e;
}

ExprPtr parse_or(Cursor& c) {
  ExprPtr e = parse_and(c);
  while (c.accept("|")) e = make_binop(Op::Or, e, parse_and(c));
  return e;
}

}  // namespace

ExprPtr parse_expr(Cursor& c) { return parse_or(c); }

}  // namespace detail

namespace {

using detail::Cursor;
using detail::Tok;

VarDecl parse_vardecl(Cursor& c) {
  VarDecl v;
  v.line = c.peek().line;
  v.name = c.expect_ident();
  c.expect(":");
  if (c.accept("bool")) {
    v.is_bool = true;
  } else {
    c.expect("[");
    v.lo = detail::parse_expr(c);
    c.expect("..");
    v.hi = detail::parse_expr(c);
    c.expect("]");
  }
  c.expect("init");
  v.init = detail::parse_expr(c);
  c.expect(";");
  return v;
}

Command parse_command(Cursor& c) {
  Command cmd;
  cmd.line = c.peek().line;
  c.expect("[");
  if (c.peek().kind == Tok::Ident) cmd.label = c.expect_ident();
  c.expect("]");
  cmd.guard = detail::parse_expr(c);
  c.expect("->");
  // A `:` at parenthesis depth 0 before the `;` separates the rate from the
  // updates (the grammar has no other use for `:` here).
  bool has_rate = false;
  int depth = 0;
  for (std::size_t j = c.pos;; ++j) {
    const auto& t = c.toks[j];
    if (t.kind == Tok::End) break;
    if (t.text == "(") ++depth;
    else if (t.text == ")") --depth;
    else if (t.text == ";" && depth == 0) break;
    else if (t.text == ":" && depth == 0) { has_rate = true; break; }
  }
  if (has_rate) {
    cmd.rate = detail::parse_expr(c);
    c.expect(":");
  }
  if (!c.accept("true")) {
    for (;;) {
      c.expect("(");
      Update u;
      u.target = c.expect_ident();
      c.expect("'");
      c.expect("=");
      u.value = detail::parse_expr(c);
      c.expect(")");
      cmd.updates.push_back(std::move(u));
      if (!c.accept("&")) break;
    }
  }
  c.expect(";");
  return cmd;
}

}  // namespace

Value parse_override_value(std::string_view text) {
  if (text == "true") return Value(true);
  if (text == "false") return Value(false);
  std::int64_t i = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
  if (ec == std::errc{} && p == text.data() + text.size()) return Value(i);
  try {
    std::size_t used = 0;
    double d = std::stod(std::string(text), &used);
    if (used == text.size()) return Value(d);
  } catch (...) {
  }
  throw ParseError("bad constant value `" + std::string(text) + "`", 0, 0);
}

Overrides parse_overrides(const std::vector<std::string>& pairs) {
  Overrides out;
  for (const auto& p : pairs) {
    auto eq = p.find('=');
    if (eq == std::string::npos)
      throw ParseError("override must be NAME=VALUE, got `" + p + "`", 0, 0);
    out[p.substr(0, eq)] = parse_override_value(std::string_view(p).substr(eq + 1));
  }
  return out;
}

ModelIR parse_model(std::string_view text, const Overrides& overrides) {
  Cursor c{detail::tokenize(text), 0};
  ModelIR m;
  c.expect("ctmc");
  while (c.peek().kind != Tok::End) {
    int line = c.peek().line;
    if (c.accept("const")) {
      ConstDecl d;
      d.line = line;
      d.declared = c.accept("int") ? Type::Int : (c.accept("double"), Type::Real);
      d.name = c.expect_ident();
      if (c.accept("=")) d.value = detail::parse_expr(c);
      c.expect(";");
      m.constants.push_back(std::move(d));
    } else if (c.accept("formula")) {
      FormulaDecl f;
      f.line = line;
      f.name = c.expect_ident();
      c.expect("=");
      f.body = detail::parse_expr(c);
      c.expect(";");
      m.formulas.push_back(std::move(f));
    } else if (c.accept("global")) {
      m.globals.push_back(parse_vardecl(c));
    } else if (c.accept("module")) {
      Module mod;
      mod.line = line;
      mod.name = c.expect_ident();
      for (;;) {
        if (c.accept("endmodule")) break;
        if (c.peek().kind == Tok::End)
          throw ParseError("missing `endmodule` for module " + mod.name, line, 0);
        if (c.peek().text == "[") mod.commands.push_back(parse_command(c));
        else mod.locals.push_back(parse_vardecl(c));
      }
      m.modules.push_back(std::move(mod));
    } else if (c.accept("rewards")) {
      RewardStructure r;
      r.line = line;
      const auto& t = c.peek();
      if (t.kind != Tok::String)
        throw ParseError("rewards block needs a quoted name", t.line, t.col);
      r.name = t.text;
      c.next();
      while (!c.accept("endrewards")) {
        if (c.peek().kind == Tok::End)
          throw ParseError("missing `endrewards` for rewards \"" + r.name + "\"", line, 0);
        int il = c.peek().line;
        if (c.accept("[")) {
          RewardTransItem item;
          item.line = il;
          if (c.peek().kind == Tok::Ident) item.label = c.expect_ident();
          c.expect("]");
          item.guard = detail::parse_expr(c);
          c.expect(":");
          item.value = detail::parse_expr(c);
          c.expect(";");
          r.trans_items.push_back(std::move(item));
        } else {
          RewardStateItem item;
          item.line = il;
          item.guard = detail::parse_expr(c);
          c.expect(":");
          item.value = detail::parse_expr(c);
          c.expect(";");
          r.state_items.push_back(std::move(item));
        }
      }
      m.rewards.push_back(std::move(r));
    } else {
      const auto& t = c.peek();
      throw ParseError("unexpected `" + t.text + "`", t.line, t.col);
    }
  }

  // apply overrides
  for (const auto& [name, value] : overrides) {
    bool found = false;
    for (auto& d : m.constants) {
      if (d.name == name) {
        d.value = make_value(value);
        d.overridden = true;
        found = true;
        break;
      }
    }
    if (!found) throw ParseError("override of undeclared constant `" + name + "`", 0, 0);
  }
  for (const auto& d : m.constants) {
    if (!d.value)
      throw ParseError("constant `" + d.name + "` has no value and was not overridden", d.line,
                       0);
  }
  return m;
}

}  // namespace gridmc
