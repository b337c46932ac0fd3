#include "hppl/lang/ast.hpp"

#include <algorithm>

#include "hppl/lang/render.hpp"

namespace hppl {

std::string_view to_string(Annotation ann) {
  switch (ann) {
    case Annotation::None:
      return "none";
    case Annotation::Approx:
      return "approx";
    case Annotation::Exact:
      return "exact";
  }
  return "none";
}

IntExpr IntExpr::literal(long long v) {
  IntExpr e;
  e.value = v;
  return e;
}

IntExpr IntExpr::named(std::string n) {
  IntExpr e;
  e.is_name = true;
  e.name = std::move(n);
  return e;
}

bool operator==(const IntExpr& a, const IntExpr& b) {
  if (a.is_name != b.is_name) return false;
  return a.is_name ? a.name == b.name : a.value == b.value;
}

NumExpr NumExpr::literal(double v) {
  NumExpr e;
  e.kind = Kind::Literal;
  e.value = v;
  return e;
}

NumExpr NumExpr::var(std::string n) {
  NumExpr e;
  e.kind = Kind::Var;
  e.name = std::move(n);
  return e;
}

NumExpr NumExpr::datum(std::string param, IntExpr index) {
  NumExpr e;
  e.kind = Kind::Datum;
  e.name = std::move(param);
  e.index = std::move(index);
  return e;
}

NumExpr NumExpr::binary(Kind op, NumExpr lhs, NumExpr rhs) {
  NumExpr e;
  e.kind = op;
  e.args.reserve(2);
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

bool operator==(const NumExpr& a, const NumExpr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NumExpr::Kind::Literal:
      return a.value == b.value;
    case NumExpr::Kind::Var:
      return a.name == b.name;
    case NumExpr::Kind::Datum:
      return a.name == b.name && a.index == b.index;
    default:
      return a.args == b.args;
  }
}

bool operator==(const IfStmt& a, const IfStmt& b) {
  return a.cond == b.cond && a.then_body == b.then_body && a.else_body == b.else_body;
}

bool operator==(const ForStmt& a, const ForStmt& b) {
  return a.index == b.index && a.lo == b.lo && a.hi == b.hi && a.body == b.body;
}

void collect_vars(const NumExpr& e, std::vector<std::string>& out) {
  if (e.kind == NumExpr::Kind::Var) {
    if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
    return;
  }
  for (const NumExpr& a : e.args) collect_vars(a, out);
}

bool is_closed(const NumExpr& e) {
  if (e.kind == NumExpr::Kind::Var) return false;
  return std::all_of(e.args.begin(), e.args.end(), [](const NumExpr& a) { return is_closed(a); });
}

std::string describe(const Stmt& s) {
  if (const auto* smp = s.as<SampleStmt>()) {
    return smp->target + " <- " + render_dist(smp->dist);
  }
  if (const auto* obs = s.as<ObserveStmt>()) {
    return "observe(" + obs->subject + ", " + render_datum(obs->datum) + ")";
  }
  if (const auto* i = s.as<IfStmt>()) {
    return "if(" + i->cond + ")";
  }
  const auto& l = std::get<ForStmt>(s.node);
  return "for " + l.index + " in " + render_int(l.lo) + " .. " + render_int(l.hi);
}

}  // namespace hppl
