#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hppl/lang/data.hpp"
#include "hppl/lang/validate.hpp"

namespace hppl {

enum class Engine { SSI, DS };

std::string_view to_string(Engine e);
/// Accepts "ssi" and "ds"; throws std::invalid_argument otherwise.
Engine parse_engine(std::string_view text);

struct RunConfig {
  std::size_t particles = 1000;
  std::uint64_t seed = 1;
  double resample_threshold = 0.5;
  Engine engine = Engine::SSI;
  std::optional<long long> n_override;
  unsigned threads = 1;
  // When false, Exact-annotated nodes are sampled like any other node.
  bool enforce_exact = true;
};

struct SampledVar {
  std::string name;
  StmtId stmt = 0;
  int iteration = 0;

  friend auto operator<=>(const SampledVar& a, const SampledVar& b) {
    if (auto c = a.stmt <=> b.stmt; c != 0) return c;
    if (auto c = a.iteration <=> b.iteration; c != 0) return c;
    return a.name <=> b.name;
  }
  friend bool operator==(const SampledVar&, const SampledVar&) = default;
};

struct Diagnostics {
  // Sorted by (statement, iteration); one entry per distinct pair.
  std::vector<SampledVar> sampled_vars;
  std::size_t peak_live = 0;
  std::vector<std::size_t> live_trace;

  friend bool operator==(const Diagnostics&, const Diagnostics&) = default;
};

/// One weighted summary of the result variable.
struct PosteriorComponent {
  enum class Kind { Gaussian, Value, Bernoulli };
  Kind kind = Kind::Gaussian;
  double weight = 0.0;
  // Gaussian mean, realized value, or Bernoulli probability.
  double mean = 0.0;
  double variance = 0.0;

  friend bool operator==(const PosteriorComponent&, const PosteriorComponent&) = default;
};

struct InferenceResult {
  // Live particles with identical summaries share one component, in order of
  // first occurrence.
  std::vector<PosteriorComponent> posterior;
  double log_evidence = 0.0;
  Diagnostics diagnostics;

  /// Mean and variance of the weighted mixture.
  double mean() const;
  double variance() const;

  friend bool operator==(const InferenceResult&, const InferenceResult&) = default;
};

class ExactViolation : public std::runtime_error {
 public:
  ExactViolation(std::string variable, StmtId stmt, int line, int iteration, std::string cause);

  const std::string& variable() const { return variable_; }
  StmtId stmt() const { return stmt_; }
  int line() const { return line_; }
  int iteration() const { return iteration_; }
  /// The statement that demanded a concrete value, e.g. `if(o)`.
  const std::string& cause() const { return cause_; }

 private:
  std::string variable_;
  StmtId stmt_;
  int line_;
  int iteration_;
  std::string cause_;
};

class AllParticlesDead : public std::runtime_error {
 public:
  AllParticlesDead(const std::string& what, Diagnostics partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Diagnostics& partial() const { return partial_; }

 private:
  Diagnostics partial_;
};

/// Raised by the enumeration oracle.
class OracleError : public std::runtime_error {
 public:
  enum class Kind { TooManyDiscrete, NonEnumerable };
  OracleError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Systematic resampling: index of the source particle for each of the
/// n offspring, given unnormalized weights and one uniform draw in [0, 1).
std::vector<std::size_t> systematic_indices(const std::vector<double>& weights, double u);

/// Runs the particle filter. Deterministic in (program, data, particles,
/// seed, engine, threshold); the thread count does not affect the result.
InferenceResult run(const CheckedProgram& program, const DataTable& data, const RunConfig& cfg);

struct OracleResult {
  struct Component {
    double weight = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    std::vector<int> choices;
  };
  std::vector<Component> mixture;
  double log_evidence = 0.0;

  double mean() const;
  double variance() const;
};

/// Exact posterior of the result variable by enumerating every Bernoulli
/// draw at the statement that introduces it; all Gaussian structure is
/// handled in closed form.
OracleResult oracle_posterior(const CheckedProgram& program, const DataTable& data, int max_discrete = 20);

/// Forward-samples the program and returns the observed values as a data
/// table, one column per parameter referenced by an observation.
DataTable simulate(const CheckedProgram& program, std::uint64_t seed);

}  // namespace hppl
