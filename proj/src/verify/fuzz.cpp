#include "hppl/verify/fuzz.hpp"

#include <algorithm>
#include <set>

#include "hppl/lang/parser.hpp"
#include "hppl/runtime/inference.hpp"
#include "hppl/util/rng.hpp"

namespace hppl {

namespace {

const char* const kGauss[] = {"g0", "g1", "g2", "g3"};
const char* const kBern[] = {"b0", "b1", "b2"};
const char* const kIndex[] = {"i", "j"};

struct Scope {
  std::set<std::string> gauss;
  std::set<std::string> bern;
  std::set<std::string> observed;
};

Scope join(const Scope& a, const Scope& b) {
  Scope out;
  std::set_intersection(a.gauss.begin(), a.gauss.end(), b.gauss.begin(), b.gauss.end(),
                        std::inserter(out.gauss, out.gauss.end()));
  std::set_intersection(a.bern.begin(), a.bern.end(), b.bern.begin(), b.bern.end(),
                        std::inserter(out.bern, out.bern.end()));
  out.observed = a.observed;
  out.observed.insert(b.observed.begin(), b.observed.end());
  return out;
}

class Generator {
 public:
  explicit Generator(std::mt19937_64& rng) : rng_(rng) {}

  std::string program() {
    Scope scope;
    std::string body;
    const int n = pick(3, 7);
    for (int k = 0; k < n; ++k) body += stmt(scope, 1);
    std::vector<std::string> bound(scope.gauss.begin(), scope.gauss.end());
    bound.insert(bound.end(), scope.bern.begin(), scope.bern.end());
    if (bound.empty()) {
      body += "  g0 <- gaussian(0., 1.);\n";
      bound.push_back("g0");
    }
    std::string params;
    for (int k = 0; k < params_; ++k) params += (k ? ", d" : "d") + std::to_string(k);
    return "function fuzz(" + params + ") {\n" + body + "  " + bound[pick(0, static_cast<int>(bound.size()) - 1)] +
           "\n}\n\nconst N = " + std::to_string(pick(1, 4)) + ";\n";
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  template <typename C>
  std::string any(const C& c) {
    auto it = c.begin();
    std::advance(it, pick(0, static_cast<int>(c.size()) - 1));
    return *it;
  }

  std::string literal() {
    static const char* const values[] = {"0.", "1.", "-2.", ".5", "3."};
    return values[pick(0, 4)];
  }

  std::string term(const Scope& s) {
    std::vector<std::string> vars(s.gauss.begin(), s.gauss.end());
    vars.insert(vars.end(), s.bern.begin(), s.bern.end());
    if (vars.empty() || chance(0.2)) return literal();
    std::string v = vars[static_cast<std::size_t>(pick(0, static_cast<int>(vars.size()) - 1))];
    if (chance(0.3)) return literal() + " * " + v;
    return v;
  }

  std::string mean(const Scope& s) {
    if (!s.gauss.empty() && chance(0.1)) {
      std::vector<std::string> g(s.gauss.begin(), s.gauss.end());
      return any(g) + " * " + any(g);
    }
    std::string out = term(s);
    if (chance(0.5)) out += (chance(0.5) ? " + " : " - ") + term(s);
    return out;
  }

  std::string variance(const Scope& s) {
    if (!s.bern.empty() && chance(0.1)) return any(s.bern) + " + .5";
    static const char* const values[] = {"1.", ".5", "4.", "2."};
    return values[pick(0, 3)];
  }

  std::string annotation(double exact, double approx) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    if (u < exact) return "exact ";
    if (u < exact + approx) return "approx ";
    return "";
  }

  std::string indent(int depth) { return std::string(static_cast<std::size_t>(2 * depth), ' '); }

  std::string stmt(Scope& s, int depth) {
    const int roll = pick(0, 99);
    if (roll < 35) {
      std::string target = kGauss[pick(0, 3)];
      std::string text = indent(depth) + target + " <- " + annotation(0.35, 0.15) + "gaussian(" + mean(s) + ", " +
                         variance(s) + ");\n";
      s.gauss.insert(target);
      s.bern.erase(target);
      s.observed.erase(target);
      return text;
    }
    if (roll < 55) {
      std::string target = kBern[pick(0, 2)];
      static const char* const probs[] = {".2", ".5", ".7", ".1", "1.", "0."};
      std::string text =
          indent(depth) + target + " <- " + annotation(0.1, 0.4) + "bernoulli(" + probs[pick(0, 5)] + ");\n";
      s.bern.insert(target);
      s.gauss.erase(target);
      s.observed.erase(target);
      return text;
    }
    if (roll < 80) {
      std::vector<std::string> open;
      for (const auto& v : s.gauss) {
        if (!s.observed.count(v)) open.push_back(v);
      }
      for (const auto& v : s.bern) {
        if (!s.observed.count(v)) open.push_back(v);
      }
      if (open.empty()) return stmt(s, depth);
      std::string v = any(open);
      s.observed.insert(v);
      std::string datum;
      if (chance(0.2)) {
        datum = s.bern.count(v) ? "1." : ".3";
      } else {
        datum = "d" + std::to_string(params_++) + "[" + (loop_ ? kIndex[loop_ - 1] : "1") + "]";
      }
      return indent(depth) + "observe(" + v + ", " + datum + ");\n";
    }
    if (roll < 92 && !s.bern.empty() && depth < 4) {
      std::string cond = any(s.bern);
      Scope a = s;
      Scope b = s;
      std::string then_body;
      std::string else_body;
      for (int k = pick(1, 2); k > 0; --k) then_body += stmt(a, depth + 1);
      for (int k = pick(1, 2); k > 0; --k) else_body += stmt(b, depth + 1);
      s = join(a, b);
      return indent(depth) + "if (" + cond + ") {\n" + then_body + indent(depth) + "} else {\n" + else_body +
             indent(depth) + "};\n";
    }
    if (loop_ < 2 && depth < 4) {
      ++loop_;
      std::string index = kIndex[loop_ - 1];
      // Observations made before the loop must not repeat inside it.
      Scope inner = s;
      inner.observed.insert(s.gauss.begin(), s.gauss.end());
      inner.observed.insert(s.bern.begin(), s.bern.end());
      std::string body;
      for (int k = pick(1, 3); k > 0; --k) body += stmt(inner, depth + 1);
      --loop_;
      s = std::move(inner);
      return indent(depth) + "for " + index + " in 1 .. N {\n" + body + indent(depth) + "};\n";
    }
    return stmt(s, depth);
  }

  std::mt19937_64& rng_;
  int params_ = 0;
  int loop_ = 0;
};

}  // namespace

std::string random_program(std::mt19937_64& rng) {
  for (;;) {
    std::string text = Generator(rng).program();
    try {
      if (validate(parse(text)).ok()) return text;
    } catch (const ParseError&) {
    }
  }
}

std::vector<ExactProbe> probe_exactness(const CheckedProgram& program, int seeds, std::size_t particles,
                                        std::uint64_t base_seed) {
  DivisionResult division = analyze_division(program);
  std::vector<ExactProbe> out;
  for (const auto& v : division.exact) out.push_back(ExactProbe{v.var, v.site, v.status, false, 0});
  if (out.empty()) return out;
  for (int k = 0; k < seeds; ++k) {
    const std::uint64_t seed = Stream::derive(base_seed, 0x5eed, static_cast<std::uint64_t>(k));
    RunConfig cfg;
    cfg.particles = particles;
    cfg.seed = seed;
    cfg.enforce_exact = false;
    Diagnostics diag;
    try {
      DataTable data = simulate(program, seed);
      diag = run(program, data, cfg).diagnostics;
    } catch (const AllParticlesDead& e) {
      diag = e.partial();
    } catch (const std::exception&) {
      continue;
    }
    for (auto& probe : out) {
      ++probe.runs;
      for (const auto& s : diag.sampled_vars) probe.sampled |= s.stmt == probe.site;
    }
  }
  return out;
}

double FuzzReport::precision() const {
  return empirically_exact == 0 ? 1.0 : static_cast<double>(verified_among_exact) / empirically_exact;
}

FuzzReport soundness_fuzz(const FuzzConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  FuzzReport report;
  for (int n = 0; n < cfg.programs; ++n) {
    std::string text = random_program(rng);
    CheckedProgram program = load_checked(text);
    ++report.programs;
    for (const auto& probe : probe_exactness(program, cfg.seeds, cfg.particles, cfg.seed + static_cast<unsigned>(n))) {
      ++report.exact_annotations;
      const bool verified = probe.status == ExactVerdict::Status::Verified;
      report.verified += verified;
      if (verified && probe.sampled) report.failures.push_back(FuzzFailure{text, probe.var, probe.site});
      if (!probe.sampled && probe.runs > 0) {
        ++report.empirically_exact;
        report.verified_among_exact += verified;
      }
    }
  }
  return report;
}

}  // namespace hppl
