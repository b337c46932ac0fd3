#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hppl/lang/ast.hpp"

namespace hppl {

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceLoc loc, std::vector<std::string> expected, std::string found);

  SourceLoc loc() const { return loc_; }
  const std::vector<std::string>& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  SourceLoc loc_;
  std::vector<std::string> expected_;
  std::string found_;
};

/// Parses a `.hppl` source text.
///
/// Grammar (informal):
///
///     program  := const* 'function' NAME '(' params ')' '{' stmt* NAME '}' ';'? const*
///     const    := 'const' NAME '=' INT ';'
///     stmt     := NAME '<-' ('approx' | 'exact')? dist ';'
///               | 'observe' '(' NAME ',' datum ')' ';'
///               | 'if' '(' NAME ')' block ('else' block)? ';'?
///               | 'for' NAME 'in' int '..' int block ';'?
///     dist     := 'gaussian' '(' expr ',' expr ')' | 'bernoulli' '(' expr ')'
///     datum    := NAME '[' int ']' | '-'? NUMBER
///     expr     := term (('+' | '-') term)*
///     term     := factor ('*' factor)*
///     factor   := NUMBER | '-' factor | NAME ('[' int ']')? | '(' expr ')'
///
/// `//` starts a comment that runs to the end of the line.
Program parse(std::string_view text);

}  // namespace hppl
