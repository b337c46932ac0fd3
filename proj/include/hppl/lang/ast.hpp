#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hppl {

struct SourceLoc {
  int line = 0;
  int column = 0;
  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

/// Statement ids are assigned by validation in pre-order, starting at 1.
/// Zero means "not yet assigned".
using StmtId = int;

enum class Annotation { None, Approx, Exact };

std::string_view to_string(Annotation ann);

/// Integer-valued expression used for loop bounds and data indices:
/// an integer literal or a name (constant or loop index).
struct IntExpr {
  bool is_name = false;
  long long value = 0;
  std::string name;

  static IntExpr literal(long long v);
  static IntExpr named(std::string n);

  friend bool operator==(const IntExpr& a, const IntExpr& b);
};

struct NumExpr {
  enum class Kind { Literal, Var, Datum, Add, Sub, Mul };

  Kind kind = Kind::Literal;
  double value = 0.0;
  // Variable name for Var, parameter name for Datum.
  std::string name;
  IntExpr index;
  std::vector<NumExpr> args;
  // Cleared by validation on a Mul whose operands both depend on random
  // variables. Not part of structural equality.
  bool affine = true;

  static NumExpr literal(double v);
  static NumExpr var(std::string n);
  static NumExpr datum(std::string param, IntExpr index);
  static NumExpr binary(Kind op, NumExpr lhs, NumExpr rhs);

  bool is_binary() const {
    return kind == Kind::Add || kind == Kind::Sub || kind == Kind::Mul;
  }
  const NumExpr& lhs() const { return args[0]; }
  const NumExpr& rhs() const { return args[1]; }

  friend bool operator==(const NumExpr& a, const NumExpr& b);
};

struct GaussianExpr {
  NumExpr mean;
  NumExpr variance;
  friend bool operator==(const GaussianExpr&, const GaussianExpr&) = default;
};

struct BernoulliExpr {
  NumExpr prob;
  friend bool operator==(const BernoulliExpr&, const BernoulliExpr&) = default;
};

using DistExpr = std::variant<GaussianExpr, BernoulliExpr>;

struct DataRef {
  std::string param;
  IntExpr index;
  friend bool operator==(const DataRef&, const DataRef&) = default;
};

/// Observed value: a data reference `param[i]` or a numeric literal.
using Datum = std::variant<DataRef, double>;

struct Stmt;
using Block = std::vector<Stmt>;

struct SampleStmt {
  std::string target;
  Annotation ann = Annotation::None;
  DistExpr dist;
  friend bool operator==(const SampleStmt&, const SampleStmt&) = default;
};

struct ObserveStmt {
  std::string subject;
  Datum datum;
  friend bool operator==(const ObserveStmt&, const ObserveStmt&) = default;
};

struct IfStmt {
  std::string cond;
  Block then_body;
  Block else_body;
  friend bool operator==(const IfStmt& a, const IfStmt& b);
};

struct ForStmt {
  std::string index;
  IntExpr lo;
  IntExpr hi;
  Block body;
  friend bool operator==(const ForStmt& a, const ForStmt& b);
};

struct Stmt {
  std::variant<SampleStmt, ObserveStmt, IfStmt, ForStmt> node;
  SourceLoc loc;
  StmtId id = 0;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <typename T>
  T* as() {
    return std::get_if<T>(&node);
  }

  // Locations and ids are metadata; equality is structural.
  friend bool operator==(const Stmt& a, const Stmt& b) { return a.node == b.node; }
};

struct ConstDecl {
  std::string name;
  long long value = 0;
  SourceLoc loc;
  friend bool operator==(const ConstDecl& a, const ConstDecl& b) {
    return a.name == b.name && a.value == b.value;
  }
};

struct Program {
  std::string name;
  std::vector<std::string> params;
  std::vector<ConstDecl> consts;
  Block body;
  std::string result;
  SourceLoc result_loc;

  friend bool operator==(const Program& a, const Program& b) {
    return a.name == b.name && a.params == b.params && a.consts == b.consts &&
           a.body == b.body && a.result == b.result;
  }
};

/// Visits every statement of a block in pre-order (the order in which ids
/// are assigned).
template <typename F>
void for_each_stmt(const Block& block, F&& f) {
  for (const Stmt& s : block) {
    f(s);
    if (const auto* i = s.as<IfStmt>()) {
      for_each_stmt(i->then_body, f);
      for_each_stmt(i->else_body, f);
    } else if (const auto* l = s.as<ForStmt>()) {
      for_each_stmt(l->body, f);
    }
  }
}

/// Names of variables referenced by an expression, in first-occurrence order.
void collect_vars(const NumExpr& e, std::vector<std::string>& out);

/// True if the expression reads no random variable or loop index.
bool is_closed(const NumExpr& e);

/// Short one-line description of a statement, e.g. `if(o)` or
/// `observe(y, yobs[i])`.
std::string describe(const Stmt& s);

}  // namespace hppl
