#include "hppl/lang/render.hpp"

#include <charconv>
#include <sstream>

namespace hppl {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

int precedence(const NumExpr& e) {
  switch (e.kind) {
    case NumExpr::Kind::Add:
    case NumExpr::Kind::Sub:
      return 1;
    case NumExpr::Kind::Mul:
      return 2;
    default:
      return 3;
  }
}

void render_expr_to(const NumExpr& e, std::string& out) {
  switch (e.kind) {
    case NumExpr::Kind::Literal:
      out += format_number(e.value);
      return;
    case NumExpr::Kind::Var:
      out += e.name;
      return;
    case NumExpr::Kind::Datum:
      out += e.name + "[" + render_int(e.index) + "]";
      return;
    default:
      break;
  }
  int p = precedence(e);
  // Operators are left-associative, so a right operand of equal precedence
  // needs parentheses to keep its grouping.
  bool paren_l = precedence(e.lhs()) < p;
  bool paren_r = precedence(e.rhs()) <= p;
  if (paren_l) out += "(";
  render_expr_to(e.lhs(), out);
  if (paren_l) out += ")";
  out += e.kind == NumExpr::Kind::Add ? " + " : e.kind == NumExpr::Kind::Sub ? " - " : " * ";
  if (paren_r) out += "(";
  render_expr_to(e.rhs(), out);
  if (paren_r) out += ")";
}

void render_block(const Block& b, int depth, std::ostringstream& os);

void render_stmt(const Stmt& s, int depth, std::ostringstream& os) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  if (const auto* smp = s.as<SampleStmt>()) {
    os << pad << smp->target << " <- ";
    if (smp->ann != Annotation::None) os << to_string(smp->ann) << " ";
    os << render_dist(smp->dist) << ";\n";
  } else if (const auto* obs = s.as<ObserveStmt>()) {
    os << pad << "observe(" << obs->subject << ", " << render_datum(obs->datum) << ");\n";
  } else if (const auto* i = s.as<IfStmt>()) {
    os << pad << "if (" << i->cond << ") {\n";
    render_block(i->then_body, depth + 1, os);
    os << pad << "}";
    if (!i->else_body.empty()) {
      os << " else {\n";
      render_block(i->else_body, depth + 1, os);
      os << pad << "}";
    }
    os << "\n";
  } else {
    const auto& l = std::get<ForStmt>(s.node);
    os << pad << "for " << l.index << " in " << render_int(l.lo) << " .. " << render_int(l.hi) << " {\n";
    render_block(l.body, depth + 1, os);
    os << pad << "}\n";
  }
}

void render_block(const Block& b, int depth, std::ostringstream& os) {
  for (const Stmt& s : b) render_stmt(s, depth, os);
}

}  // namespace

std::string render_int(const IntExpr& e) { return e.is_name ? e.name : std::to_string(e.value); }

std::string render_expr(const NumExpr& e) {
  std::string out;
  render_expr_to(e, out);
  return out;
}

std::string render_dist(const DistExpr& d) {
  if (const auto* g = std::get_if<GaussianExpr>(&d)) {
    return "gaussian(" + render_expr(g->mean) + ", " + render_expr(g->variance) + ")";
  }
  return "bernoulli(" + render_expr(std::get<BernoulliExpr>(d).prob) + ")";
}

std::string render_datum(const Datum& d) {
  if (const auto* r = std::get_if<DataRef>(&d)) return r->param + "[" + render_int(r->index) + "]";
  return format_number(std::get<double>(d));
}

std::string render(const Program& p) {
  std::ostringstream os;
  for (const ConstDecl& c : p.consts) os << "const " << c.name << " = " << c.value << ";\n";
  os << "function " << p.name << "(";
  for (std::size_t i = 0; i < p.params.size(); ++i) os << (i ? ", " : "") << p.params[i];
  os << ") {\n";
  render_block(p.body, 1, os);
  os << "  " << p.result << "\n}\n";
  return os.str();
}

}  // namespace hppl
