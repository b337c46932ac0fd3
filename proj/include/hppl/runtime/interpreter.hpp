#pragma once

#include <cstdint>
#include <vector>

#include "hppl/runtime/compile.hpp"
#include "hppl/runtime/inference.hpp"
#include "hppl/symbolic/state.hpp"
#include "hppl/util/rng.hpp"

namespace hppl {

/// Environment entry: unbound, a node of the particle's state, or a real
/// (loop indices).
struct Slot {
  enum class Kind : std::uint8_t { Unbound, Node, Real };
  Kind kind = Kind::Unbound;
  NodeId id;
  double value = 0.0;

  friend bool operator==(const Slot&, const Slot&) = default;
};

struct Particle {
  SymbolicState state;
  std::vector<Slot> env;
  double logw = 0.0;
  Stream rng;
};

/// How forced nodes obtain their value.
enum class DrawMode {
  Random,     // sample from the particle's stream
  Enumerate,  // Bernoulli values from a Tape; Gaussians are an error
  Shape,      // Bernoulli values from a Tape; Gaussians take a fixed value;
              // observations never change the weight
};

struct ExecOptions {
  Engine engine = Engine::SSI;
  bool enforce_exact = true;
  bool force_bernoulli_at_sample = false;
  bool force_all_at_sample = false;
  // Observations force the subject and record its value instead of scoring.
  bool record_observations = false;
  // Data reads return 0 (no table needed).
  bool zero_data = false;
  DrawMode draw = DrawMode::Random;
};

/// Replayable sequence of Bernoulli outcomes. Positions beyond the prefix
/// take the default outcome (0 unless that outcome has probability 0).
struct Tape {
  std::vector<int> prefix;
  std::vector<int> taken;
  std::vector<double> probs;
  std::size_t limit = 20;
};

/// Per-parameter columns filled by recorded observations.
struct Recorder {
  std::vector<std::vector<double>> columns;
};

struct ExecCtx {
  int iteration = 0;
  std::vector<SampledVar>* sampled = nullptr;
  Tape* tape = nullptr;
  Recorder* recorder = nullptr;
};

/// Single-particle semantics shared by the particle filter, the oracle,
/// the simulator and the memory analysis.
class Interpreter {
 public:
  /// `columns[k]` is the data for parameter k, or null when absent.
  Interpreter(const Compiled& code, std::vector<const std::vector<double>*> columns, ExecOptions options);

  const Compiled& code() const { return code_; }
  const ExecOptions& options() const { return options_; }

  Particle make_particle(Stream rng) const;

  void exec_block(Particle& p, const CBlock& block, ExecCtx& ctx) const;
  void exec_stmt(Particle& p, const CStmt& stmt, ExecCtx& ctx) const;

  /// Binds the loop index for iteration value `k`.
  void enter_iteration(Particle& p, const CFor& loop, long long k) const;
  /// Drops nodes unreachable from the environment.
  void collect(Particle& p) const;
  /// Live (non-realized, reachable) node count.
  std::size_t live_count(const Particle& p) const;
  std::vector<NodeId> roots(const Particle& p) const;

  /// Obtains a concrete value for `id`, forcing blockers first.
  /// `reason` is the statement demanding the value (0 for the result).
  double force(Particle& p, NodeId id, ExecCtx& ctx, StmtId reason) const;

  /// Forces whatever prevents the result's marginal from being computed.
  void settle_result(Particle& p, ExecCtx& ctx) const;
  /// Marginal summary of the result variable (weight left at 0).
  PosteriorComponent summarize(const Particle& p) const;

 private:
  AffineExpr eval(Particle& p, const CExpr& e, ExecCtx& ctx, StmtId reason) const;
  long long eval_int(const Particle& p, const CInt& e) const;
  double datum(int param, long long row) const;
  double draw(Particle& p, NodeId id, ExecCtx& ctx) const;
  void force_all(Particle& p, const AffineExpr& e, ExecCtx& ctx, StmtId reason) const;
  void chain_policy(Particle& p, NodeId subject, ExecCtx& ctx, StmtId reason) const;
  AffineExpr chain_restrict(Particle& p, AffineExpr mean, ExecCtx& ctx, StmtId reason) const;
  void exec_sample(Particle& p, const CStmt& s, const CSample& x, ExecCtx& ctx) const;
  void exec_observe(Particle& p, const CStmt& s, const CObserve& x, ExecCtx& ctx) const;
  void exec_if(Particle& p, const CStmt& s, const CIf& x, ExecCtx& ctx) const;
  void exec_for(Particle& p, const CFor& x, ExecCtx& ctx) const;

  const Compiled& code_;
  std::vector<const std::vector<double>*> columns_;
  ExecOptions options_;
};

/// Resolves the program's parameters against a data table.
std::vector<const std::vector<double>*> bind_columns(const CheckedProgram& program, const DataTable& data);

}  // namespace hppl
