#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hppl/lang/validate.hpp"
#include "hppl/verify/division.hpp"

namespace hppl {

/// Source text of a random program that passes validation. Programs mix
/// Gaussian and Bernoulli samples, all three annotations, observations,
/// branches, nested loops and occasional non-affine means.
std::string random_program(std::mt19937_64& rng);

/// Empirical behaviour of one Exact annotation.
struct ExactProbe {
  std::string var;
  StmtId site = 0;
  ExactVerdict::Status status = ExactVerdict::Status::Verified;
  // Some run drew the site.
  bool sampled = false;
  // Runs that completed (possibly with all particles dead).
  int runs = 0;
};

/// Analyzes the program, then runs the SSI engine with exactness not
/// enforced on `seeds` simulated data sets and records which Exact sites
/// were drawn.
std::vector<ExactProbe> probe_exactness(const CheckedProgram& program, int seeds, std::size_t particles,
                                        std::uint64_t base_seed);

struct FuzzConfig {
  std::uint64_t seed = 1;
  int programs = 500;
  int seeds = 20;
  std::size_t particles = 4;
};

struct FuzzFailure {
  std::string program;
  std::string var;
  StmtId site = 0;
};

struct FuzzReport {
  int programs = 0;
  int exact_annotations = 0;
  int verified = 0;
  // Exact annotations never drawn in any run, and how many of those were Verified.
  int empirically_exact = 0;
  int verified_among_exact = 0;
  // Verified annotations that some run drew.
  std::vector<FuzzFailure> failures;

  double precision() const;
};

FuzzReport soundness_fuzz(const FuzzConfig& cfg);

}  // namespace hppl
