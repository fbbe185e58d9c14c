#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gridmc/expr.hpp"

// Lexer and expression grammar shared between the model parser and the
// property parser.
namespace gridmc::detail {

enum class Tok { Ident, Int, Real, String, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

std::vector<Token> tokenize(std::string_view text);

struct Cursor {
  std::vector<Token> toks;
  std::size_t pos = 0;

  const Token& peek(int ahead = 0) const;
  const Token& next();
  bool accept(std::string_view text);
  void expect(std::string_view text);
  std::string expect_ident();
};

ExprPtr parse_expr(Cursor& c);

}  // namespace gridmc::detail
