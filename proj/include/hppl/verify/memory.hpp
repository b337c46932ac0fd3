#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hppl/lang/validate.hpp"

namespace hppl {

struct MemConfig {
  // Largest lookback, in iterations, allowed for a loop node to be consumed.
  int m_max = 3;
  // Loop body applications tried before giving up.
  int k_max = 16;
  // Distinct abstract states tolerated per program point.
  std::size_t max_states = 1024;
};

struct MemoryVerdict {
  enum class Kind { Bounded, Unbounded, Unknown };
  Kind kind = Kind::Unknown;
  // Bounded: ceiling on nodes reachable from the environment at the end of
  // any top-level loop iteration, realized ones included.
  std::size_t bound = 0;
  // Bounded: iterations a loop node may outlive the iteration that made it.
  int m = 0;
  // Unbounded: variable and Sample statement of an accumulating node.
  std::string witness;
  StmtId witness_stmt = 0;
  // Unknown: why the analysis gave up.
  std::string detail;
  // Largest reachable-node count after each explored iteration of the
  // first loop that decided the verdict.
  std::vector<std::size_t> explored;

  friend bool operator==(const MemoryVerdict&, const MemoryVerdict&) = default;
};

std::string_view to_string(MemoryVerdict::Kind k);
/// Human form: `Bounded(3, m=1)`, `Unbounded(witness x)` or `Unknown`.
std::string describe(const MemoryVerdict& v);

/// Explores the program's symbolic states with all Gaussian draws replaced
/// by a fixed value and every Bernoulli outcome enumerated. Each top-level
/// loop body is applied until the set of state shapes (node kinds, sites,
/// ages relative to the current iteration, and parent structure) repeats.
MemoryVerdict analyze_memory(const CheckedProgram& program, const MemConfig& cfg = {});

}  // namespace hppl
