#pragma once

#include <string>
#include <variant>
#include <vector>

#include "hppl/lang/ast.hpp"
#include "hppl/lang/validate.hpp"

namespace hppl {

/// Integer operand after constant resolution: a literal or a loop-index slot.
struct CInt {
  bool is_slot = false;
  int slot = -1;
  long long value = 0;
};

/// Numeric expression with names resolved to environment slots and data
/// parameters resolved to parameter positions. Constants are folded.
struct CExpr {
  NumExpr::Kind kind = NumExpr::Kind::Literal;
  double value = 0.0;
  int slot = -1;
  int param = -1;
  CInt index;
  std::vector<CExpr> args;
};

struct CStmt;
using CBlock = std::vector<CStmt>;

struct CSample {
  int slot = -1;
  Annotation ann = Annotation::None;
  bool gaussian = true;
  CExpr mean;
  CExpr variance;
  double prob = 0.0;
};

struct CObserve {
  int slot = -1;
  bool literal = false;
  double value = 0.0;
  int param = -1;
  CInt index;
};

struct CIf {
  int cond = -1;
  CBlock then_body;
  CBlock else_body;
  // Slots read by distribution expressions inside the branches whose
  // bindings come from before the If.
  std::vector<int> pre_reads;
};

struct CFor {
  int index = -1;
  long long lo = 1;
  long long hi = 0;
  CBlock body;
};

struct CStmt {
  std::variant<CSample, CObserve, CIf, CFor> node;
  StmtId id = 0;
  int line = 0;
  bool has_observe = false;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
};

/// A checked program lowered to slot-indexed form.
struct Compiled {
  const CheckedProgram* program = nullptr;
  std::vector<std::string> slot_names;
  CBlock body;
  int result_slot = -1;

  std::size_t slot_count() const { return slot_names.size(); }
};

/// The CheckedProgram must outlive the result.
Compiled compile(const CheckedProgram& program);

}  // namespace hppl
