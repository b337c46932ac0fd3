#include "hppl/symbolic/affine.hpp"

#include <algorithm>
#include <cstdio>

namespace hppl {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

AffineExpr AffineExpr::variable(NodeId id, double coef) {
  AffineExpr e;
  e.add_term(id, coef);
  return e;
}

namespace {

auto lower(const AffineExpr::Terms& terms, NodeId id) {
  return std::lower_bound(terms.begin(), terms.end(), id,
                          [](const AffineExpr::Term& t, NodeId n) { return t.node < n; });
}

}  // namespace

bool AffineExpr::references(NodeId id) const {
  auto it = lower(terms_, id);
  return it != terms_.end() && it->node == id;
}

double AffineExpr::coefficient(NodeId id) const {
  auto it = lower(terms_, id);
  return (it != terms_.end() && it->node == id) ? it->coef : 0.0;
}

void AffineExpr::add_term(NodeId id, double coef) {
  if (coef == 0.0) return;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), id,
                             [](const Term& t, NodeId n) { return t.node < n; });
  if (it != terms_.end() && it->node == id) {
    it->coef += coef;
    if (it->coef == 0.0) terms_.erase(it);
  } else {
    terms_.insert(it, Term{id, coef});
  }
}

void AffineExpr::add_scaled(const AffineExpr& other, double factor) {
  intercept_ += factor * other.intercept_;
  if (factor == 0.0) return;
  for (const Term& t : other.terms_) add_term(t.node, factor * t.coef);
}

double AffineExpr::remove(NodeId id) {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), id,
                             [](const Term& t, NodeId n) { return t.node < n; });
  if (it == terms_.end() || it->node != id) return 0.0;
  double c = it->coef;
  terms_.erase(it);
  return c;
}

void AffineExpr::substitute(NodeId id, double value) {
  double c = remove(id);
  if (c != 0.0) intercept_ += c * value;
}

AffineExpr& AffineExpr::operator*=(double f) {
  intercept_ *= f;
  if (f == 0.0) {
    terms_.clear();
    return *this;
  }
  for (Term& t : terms_) t.coef *= f;
  // Underflow can produce exact zeros.
  terms_.erase(std::remove_if(terms_.begin(), terms_.end(), [](const Term& t) { return t.coef == 0.0; }),
               terms_.end());
  return *this;
}

std::string AffineExpr::to_string() const {
  std::string out = format_g17(intercept_);
  for (const Term& t : terms_) {
    out += " + " + format_g17(t.coef) + "*n" + std::to_string(t.node.value);
  }
  return out;
}

}  // namespace hppl
