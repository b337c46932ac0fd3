#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hppl/lang/ast.hpp"

namespace hppl::detail {

enum class Tok {
  Ident,
  Number,
  Arrow,     // <-
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semi,
  DotDot,
  Plus,
  Minus,
  Star,
  Equals,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

/// Human-readable token description for diagnostics, e.g. `';'`.
std::string spell(Tok kind);
std::string describe_token(const Token& t);

/// Splits source text into tokens. Throws ParseError on an unexpected
/// character.
std::vector<Token> tokenize(std::string_view text);

}  // namespace hppl::detail
