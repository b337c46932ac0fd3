#include "lexer.hpp"

#include <cctype>

#include "hppl/lang/parser.hpp"

namespace hppl::detail {

std::string spell(Tok kind) {
  switch (kind) {
    case Tok::Ident:
      return "identifier";
    case Tok::Number:
      return "number";
    case Tok::Arrow:
      return "'<-'";
    case Tok::LParen:
      return "'('";
    case Tok::RParen:
      return "')'";
    case Tok::LBrace:
      return "'{'";
    case Tok::RBrace:
      return "'}'";
    case Tok::LBracket:
      return "'['";
    case Tok::RBracket:
      return "']'";
    case Tok::Comma:
      return "','";
    case Tok::Semi:
      return "';'";
    case Tok::DotDot:
      return "'..'";
    case Tok::Plus:
      return "'+'";
    case Tok::Minus:
      return "'-'";
    case Tok::Star:
      return "'*'";
    case Tok::Equals:
      return "'='";
    case Tok::End:
      return "end of input";
  }
  return "?";
}

std::string describe_token(const Token& t) {
  switch (t.kind) {
    case Tok::Ident:
      return "identifier '" + t.text + "'";
    case Tok::Number:
      return "number " + t.text;
    default:
      return spell(t.kind);
  }
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto peek = [&](std::size_t off) -> char { return i + off < text.size() ? text[i + off] : '\0'; };

  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.loc = {line, col};
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(text.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (digit(c) || (c == '.' && digit(peek(1)))) {
      std::size_t j = i;
      while (j < text.size() && digit(text[j])) ++j;
      // A '.' followed by another '.' is the range operator, not a decimal point.
      if (j < text.size() && text[j] == '.' && !(j + 1 < text.size() && text[j + 1] == '.')) {
        ++j;
        while (j < text.size() && digit(text[j])) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && digit(text[k])) {
          while (k < text.size() && digit(text[k])) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(text.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    auto simple = [&](Tok k, std::size_t len) {
      t.kind = k;
      t.text = std::string(text.substr(i, len));
      advance(len);
      out.push_back(t);
    };
    switch (c) {
      case '<':
        if (peek(1) == '-') {
          simple(Tok::Arrow, 2);
          continue;
        }
        break;
      case '.':
        if (peek(1) == '.') {
          simple(Tok::DotDot, 2);
          continue;
        }
        break;
      case '(':
        simple(Tok::LParen, 1);
        continue;
      case ')':
        simple(Tok::RParen, 1);
        continue;
      case '{':
        simple(Tok::LBrace, 1);
        continue;
      case '}':
        simple(Tok::RBrace, 1);
        continue;
      case '[':
        simple(Tok::LBracket, 1);
        continue;
      case ']':
        simple(Tok::RBracket, 1);
        continue;
      case ',':
        simple(Tok::Comma, 1);
        continue;
      case ';':
        simple(Tok::Semi, 1);
        continue;
      case '+':
        simple(Tok::Plus, 1);
        continue;
      case '-':
        simple(Tok::Minus, 1);
        continue;
      case '*':
        simple(Tok::Star, 1);
        continue;
      case '=':
        simple(Tok::Equals, 1);
        continue;
      default:
        break;
    }
    throw ParseError(t.loc, {}, std::string("character '") + c + "'");
  }
  Token end;
  end.kind = Tok::End;
  end.loc = {line, col};
  out.push_back(end);
  return out;
}

}  // namespace hppl::detail
