#pragma once

#include <map>
#include <string>
#include <string_view>

#include "gridmc/model.hpp"

namespace gridmc {

struct ParseError : std::runtime_error {
  ParseError(std::string msg, int line, int col);
  int line, col;
};

// `NAME=VALUE` pairs; values lex as int, real, or true/false.
using Overrides = std::map<std::string, Value, std::less<>>;

Value parse_override_value(std::string_view text);
Overrides parse_overrides(const std::vector<std::string>& pairs);

// Parse a complete `ctmc` model. Overrides replace the defining expressions
// of the named constants; naming an undeclared constant is an error, as is a
// constant that ends up with no value. `//` comments are stripped.
ModelIR parse_model(std::string_view text, const Overrides& overrides = {});

}  // namespace gridmc
