#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hppl/lang/validate.hpp"
#include "hppl/runtime/compile.hpp"

namespace hppl {

/// Abstract value of one program variable. Sites are Sample statement ids:
/// `sites` are the statements whose node the variable may currently hold,
/// `deps` the statements whose nodes its distribution may depend on.
struct AbsVal {
  enum class Kind : std::uint8_t { Bottom, LinGauss, Discrete, Realized, Top };
  Kind kind = Kind::Bottom;
  std::set<StmtId> sites;
  std::set<StmtId> deps;

  /// True unless the variable is certainly a concrete value (or unbound).
  bool maybe_symbolic() const { return kind != Kind::Bottom && kind != Kind::Realized; }

  friend bool operator==(const AbsVal&, const AbsVal&) = default;
};

AbsVal::Kind join(AbsVal::Kind a, AbsVal::Kind b);
AbsVal join(const AbsVal& a, const AbsVal& b);
bool leq(const AbsVal& a, const AbsVal& b);
std::string_view to_string(AbsVal::Kind k);

struct AbsEnv {
  std::map<std::string, AbsVal> vars;
  // Sites the runtime may draw from directly, with the first statement
  // that may demand it.
  std::map<StmtId, StmtId> may_sample;
  // Bernoulli sites that may be drawn because they block a hoist. This is
  // an over-approximation based on dependency components.
  std::map<StmtId, StmtId> may_block;
  // Sites certainly drawn on every path. Informational; not part of the order.
  std::set<StmtId> must_sample;

  friend bool operator==(const AbsEnv&, const AbsEnv&) = default;
};

AbsEnv join(const AbsEnv& a, const AbsEnv& b);
/// Pointwise order on variables and inclusion on the may sets.
bool leq(const AbsEnv& a, const AbsEnv& b);

/// Abstract effect of one statement (loops run to their fixpoint).
AbsEnv transfer(const Compiled& code, const CStmt& stmt, AbsEnv in);

struct ExactVerdict {
  enum class Status { Verified, Refuted, Unknown };
  std::string var;
  StmtId site = 0;
  Status status = Status::Verified;
  // Statement that may force the site (0 stands for the result).
  StmtId reason = 0;
  std::string reason_text;

  friend bool operator==(const ExactVerdict&, const ExactVerdict&) = default;
};

std::string_view to_string(ExactVerdict::Status s);

struct DivisionResult {
  // One entry per Exact annotation, by statement id.
  std::vector<ExactVerdict> exact;
  // Unannotated Gaussian sites that are never drawn.
  std::vector<StmtId> inferred_exact;
  // Environment after each statement (the last visit, for loop bodies).
  std::map<StmtId, AbsEnv> trace;
  AbsEnv final_env;

  bool all_verified() const;
};

DivisionResult analyze_division(const CheckedProgram& program);

}  // namespace hppl
