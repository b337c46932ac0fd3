#include "hppl/lang/parser.hpp"

#include <array>
#include <charconv>
#include <sstream>

#include "lexer.hpp"

namespace hppl {

namespace {

std::string format_parse_error(SourceLoc loc, const std::vector<std::string>& expected,
                               const std::string& found) {
  std::ostringstream os;
  os << loc.line << ":" << loc.column << ": ";
  if (expected.empty()) {
    os << "unexpected " << found;
  } else {
    os << "expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) os << (i + 1 == expected.size() ? " or " : ", ");
      os << expected[i];
    }
    os << " but found " << found;
  }
  return os.str();
}

}  // namespace

ParseError::ParseError(SourceLoc loc, std::vector<std::string> expected, std::string found)
    : std::runtime_error(format_parse_error(loc, expected, found)),
      loc_(loc),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

using detail::Tok;
using detail::Token;

constexpr std::array<std::string_view, 11> kKeywords = {
    "function", "const", "for", "in", "if", "else", "observe", "approx", "exact", "gaussian", "bernoulli"};

bool is_keyword(std::string_view s) {
  for (auto k : kKeywords)
    if (k == s) return true;
  return false;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program p;
    while (at_keyword("const")) p.consts.push_back(const_decl());
    expect_keyword("function");
    p.name = ident("function name");
    expect(Tok::LParen);
    if (!at(Tok::RParen)) {
      p.params.push_back(ident("parameter name"));
      while (accept(Tok::Comma)) p.params.push_back(ident("parameter name"));
    }
    expect(Tok::RParen);
    expect(Tok::LBrace);
    while (true) {
      if (at(Tok::Ident) && !is_keyword(cur().text) && peek(1).kind == Tok::RBrace) {
        p.result_loc = cur().loc;
        p.result = cur().text;
        pos_ += 2;
        break;
      }
      if (at(Tok::RBrace)) fail({"identifier"});
      p.body.push_back(stmt());
    }
    accept(Tok::Semi);
    while (at_keyword("const")) p.consts.push_back(const_decl());
    if (!at(Tok::End)) fail({"'const'", detail::spell(Tok::End)});
    return p;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t off) const {
    std::size_t k = pos_ + off;
    return k < toks_.size() ? toks_[k] : toks_.back();
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_keyword(std::string_view kw) const { return at(Tok::Ident) && cur().text == kw; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw ParseError(cur().loc, std::move(expected), detail::describe_token(cur()));
  }

  bool accept(Tok k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok k) {
    if (!at(k)) fail({detail::spell(k)});
    return toks_[pos_++];
  }
  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) fail({"'" + std::string(kw) + "'"});
    ++pos_;
  }
  std::string ident(const char* what) {
    if (!at(Tok::Ident) || is_keyword(cur().text)) fail({what});
    return toks_[pos_++].text;
  }

  double number_value(const Token& t) const {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      throw ParseError(t.loc, {"number"}, detail::describe_token(t));
    }
    return v;
  }

  long long int_value(const Token& t) const {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      throw ParseError(t.loc, {"integer"}, detail::describe_token(t));
    }
    return v;
  }

  ConstDecl const_decl() {
    ConstDecl c;
    c.loc = cur().loc;
    expect_keyword("const");
    c.name = ident("constant name");
    expect(Tok::Equals);
    bool neg = accept(Tok::Minus);
    if (!at(Tok::Number)) fail({"integer"});
    c.value = int_value(toks_[pos_++]);
    if (neg) c.value = -c.value;
    expect(Tok::Semi);
    return c;
  }

  IntExpr int_expr() {
    if (at(Tok::Number)) return IntExpr::literal(int_value(toks_[pos_++]));
    if (at(Tok::Minus) && peek(1).kind == Tok::Number) {
      ++pos_;
      return IntExpr::literal(-int_value(toks_[pos_++]));
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) return IntExpr::named(toks_[pos_++].text);
    fail({"integer", "identifier"});
  }

  Block block() {
    expect(Tok::LBrace);
    Block b;
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) fail({"'}'"});
      b.push_back(stmt());
    }
    ++pos_;
    return b;
  }

  Stmt stmt() {
    Stmt s;
    s.loc = cur().loc;
    if (at_keyword("observe")) {
      ++pos_;
      ObserveStmt o;
      expect(Tok::LParen);
      o.subject = ident("identifier");
      expect(Tok::Comma);
      o.datum = datum();
      expect(Tok::RParen);
      expect(Tok::Semi);
      s.node = std::move(o);
      return s;
    }
    if (at_keyword("if")) {
      ++pos_;
      IfStmt i;
      expect(Tok::LParen);
      i.cond = ident("identifier");
      expect(Tok::RParen);
      i.then_body = block();
      if (at_keyword("else")) {
        ++pos_;
        i.else_body = block();
      }
      accept(Tok::Semi);
      s.node = std::move(i);
      return s;
    }
    if (at_keyword("for")) {
      ++pos_;
      ForStmt f;
      f.index = ident("loop index");
      expect_keyword("in");
      f.lo = int_expr();
      expect(Tok::DotDot);
      f.hi = int_expr();
      f.body = block();
      accept(Tok::Semi);
      s.node = std::move(f);
      return s;
    }
    if (!at(Tok::Ident) || is_keyword(cur().text)) fail({"statement"});
    SampleStmt smp;
    smp.target = toks_[pos_++].text;
    expect(Tok::Arrow);
    if (at_keyword("approx")) {
      smp.ann = Annotation::Approx;
      ++pos_;
    } else if (at_keyword("exact")) {
      smp.ann = Annotation::Exact;
      ++pos_;
    }
    smp.dist = dist();
    expect(Tok::Semi);
    s.node = std::move(smp);
    return s;
  }

  DistExpr dist() {
    if (at_keyword("gaussian")) {
      ++pos_;
      expect(Tok::LParen);
      GaussianExpr g;
      g.mean = expr();
      expect(Tok::Comma);
      g.variance = expr();
      expect(Tok::RParen);
      return g;
    }
    if (at_keyword("bernoulli")) {
      ++pos_;
      expect(Tok::LParen);
      BernoulliExpr b;
      b.prob = expr();
      expect(Tok::RParen);
      return b;
    }
    fail({"'gaussian'", "'bernoulli'"});
  }

  Datum datum() {
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      DataRef r;
      r.param = toks_[pos_++].text;
      expect(Tok::LBracket);
      r.index = int_expr();
      expect(Tok::RBracket);
      return r;
    }
    bool neg = accept(Tok::Minus);
    if (!at(Tok::Number)) fail({"data reference", "number"});
    double v = number_value(toks_[pos_++]);
    return neg ? -v : v;
  }

  NumExpr expr() {
    NumExpr lhs = term();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      auto op = at(Tok::Plus) ? NumExpr::Kind::Add : NumExpr::Kind::Sub;
      ++pos_;
      lhs = NumExpr::binary(op, std::move(lhs), term());
    }
    return lhs;
  }

  NumExpr term() {
    NumExpr lhs = factor();
    while (accept(Tok::Star)) lhs = NumExpr::binary(NumExpr::Kind::Mul, std::move(lhs), factor());
    return lhs;
  }

  NumExpr factor() {
    if (at(Tok::Number)) return NumExpr::literal(number_value(toks_[pos_++]));
    if (accept(Tok::Minus)) {
      NumExpr inner = factor();
      if (inner.kind == NumExpr::Kind::Literal) {
        inner.value = -inner.value;
        return inner;
      }
      return NumExpr::binary(NumExpr::Kind::Mul, NumExpr::literal(-1.0), std::move(inner));
    }
    if (accept(Tok::LParen)) {
      NumExpr e = expr();
      expect(Tok::RParen);
      return e;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      std::string name = toks_[pos_++].text;
      if (accept(Tok::LBracket)) {
        IntExpr idx = int_expr();
        expect(Tok::RBracket);
        return NumExpr::datum(std::move(name), std::move(idx));
      }
      return NumExpr::var(std::move(name));
    }
    fail({"number", "identifier", "'('", "'-'"});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Program parse(std::string_view text) { return Parser(detail::tokenize(text)).program(); }

}  // namespace hppl
