#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include <boost/container/small_vector.hpp>

namespace hppl {

/// Identifier of a random-variable node. Allocated from a per-state
/// monotonic counter and never reused within a state's lineage.
struct NodeId {
  std::uint32_t value = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// intercept + sum(coef_i * node_i), kept canonical: terms sorted by node,
/// at most one term per node, no zero coefficients.
class AffineExpr {
 public:
  struct Term {
    NodeId node;
    double coef = 0.0;
    friend bool operator==(const Term&, const Term&) = default;
  };
  using Terms = boost::container::small_vector<Term, 2>;

  AffineExpr() = default;
  explicit AffineExpr(double intercept) : intercept_(intercept) {}
  static AffineExpr variable(NodeId id, double coef = 1.0);

  double intercept() const { return intercept_; }
  const Terms& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }
  bool references(NodeId id) const;
  double coefficient(NodeId id) const;

  void set_intercept(double c) { intercept_ = c; }
  void add_term(NodeId id, double coef);
  /// Adds factor * other.
  void add_scaled(const AffineExpr& other, double factor);
  /// Removes the term for `id` and returns its coefficient (0 if absent).
  double remove(NodeId id);
  /// Folds node `id` := value into the intercept.
  void substitute(NodeId id, double value);

  AffineExpr& operator+=(const AffineExpr& o) {
    add_scaled(o, 1.0);
    return *this;
  }
  AffineExpr& operator-=(const AffineExpr& o) {
    add_scaled(o, -1.0);
    return *this;
  }
  AffineExpr& operator*=(double f);

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(AffineExpr a, double f) { return a *= f; }
  friend AffineExpr operator*(double f, AffineExpr a) { return a *= f; }

  friend bool operator==(const AffineExpr&, const AffineExpr&) = default;

  /// `c + a*n1 + b*n2` with 17 significant digits.
  std::string to_string() const;

 private:
  double intercept_ = 0.0;
  Terms terms_;
};

/// printf("%.17g").
std::string format_g17(double v);

}  // namespace hppl
