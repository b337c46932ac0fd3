// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hppl/lang/validate.hpp"
#include "hppl/runtime/inference.hpp"
#include "hppl/verify/division.hpp"
#include "hppl/verify/fuzz.hpp"
#include "hppl/verify/memory.hpp"
#include "joint_check.hpp"
#include "test_util.hpp"

namespace hppl {
namespace {

using test::model_path;
using test::model_text;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

CheckedProgram model(const std::string& name, ConstOverrides overrides = {}) {
  return load_checked(model_text(name), overrides);
}

RunConfig config(std::size_t particles, std::uint64_t seed, Engine engine = Engine::SSI) {
  RunConfig c;
  c.particles = particles;
  c.seed = seed;
  c.engine = engine;
  return c;
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  for (double x : xs) r.sd += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(r.sd / static_cast<double>(xs.size() - 1));
  return r;
}

// x_t = .9 x_{t-1} + .5 + N(0, 1), y_t = x_t + N(0, 2), x_0 ~ N(0, 100)
void kalman(Verdict& v) {
  CheckedProgram p = model("kalman.hppl");
  DataTable data = read_csv_file(model_path("kalman.csv"));
  const auto& y = data.column("yobs");
  double mean = 0.0;
  double var = 100.0;
  double log_z = 0.0;
  for (double obs : y) {
    const double m = 0.9 * mean + 0.5;
    const double pv = 0.81 * var + 1.0;
    const double s = pv + 2.0;
    log_z += test::normal_logpdf(obs, m, s);
    mean = m + pv / s * (obs - m);
    var = pv - pv * pv / s;
  }
  const auto start = Clock::now();
  InferenceResult r = run(p, data, config(100, 1));
  const double secs = seconds_since(start);
  const double mean_err = std::abs(r.mean() - mean);
  const double var_err = std::abs(r.variance() - var);
  v.detail << "steps=" << y.size() << " mean_err=" << mean_err << " var_err=" << var_err
           << " log_z_err=" << std::abs(r.log_evidence - log_z) << " sampled=" << r.diagnostics.sampled_vars.size()
           << " time=" << secs << "s";
  v.require(y.size() == 50, "50 steps");
  v.require(mean_err <= 1e-9 && var_err <= 1e-9, "moments within 1e-9");
  v.require(r.diagnostics.sampled_vars.empty(), "nothing sampled");
  v.require(secs < 1.0, "under 1 s");
}

void oracle_equivalence(Verdict& v) {
  CheckedProgram p = model("outlier.hppl");
  DataTable data = read_csv_file(model_path("outlier.csv"));
  OracleResult exact = oracle_posterior(p, data);
  std::vector<double> means;
  std::vector<double> evidences;
  const auto start = Clock::now();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    InferenceResult r = run(p, data, config(100000, seed));
    means.push_back(r.mean());
    evidences.push_back(r.log_evidence);
  }
  const double secs = seconds_since(start);
  const MeanSd m = mean_sd(means);
  const MeanSd e = mean_sd(evidences);
  const double se_m = m.sd / std::sqrt(20.0);
  const double se_e = e.sd / std::sqrt(20.0);
  v.detail << "components=" << exact.mixture.size() << " oracle_mean=" << exact.mean() << " pf_mean=" << m.mean
           << " se=" << se_m << " oracle_logZ=" << exact.log_evidence << " pf_logZ=" << e.mean << " se=" << se_e
           << " time=" << secs << "s";
  v.require(exact.mixture.size() == 32, "32 enumerated components");
  v.require(std::abs(m.mean - exact.mean()) <= 4 * se_m, "mean within 4 standard errors");
  v.require(std::abs(e.mean - exact.log_evidence) <= 4 * se_e, "log evidence within 4 standard errors");
  v.require(secs < 60.0, "under 60 s");
}

void division_guarantee(Verdict& v) {
  CheckedProgram p = model("outlier.hppl");
  DataTable data = read_csv_file(model_path("outlier.csv"));
  std::size_t draws = 0;
  bool only_o = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    InferenceResult r = run(p, data, config(1000, seed));
    for (const auto& s : r.diagnostics.sampled_vars) only_o = only_o && s.name == "o";
    draws += r.diagnostics.sampled_vars.size();
  }
  CheckedProgram gap = model("ds_gap.hppl");
  DataTable gap_data = read_csv_file(model_path("ds_gap.csv"));
  InferenceResult ssi = run(gap, gap_data, config(1000, 1, Engine::SSI));
  InferenceResult ds = run(gap, gap_data, config(1000, 1, Engine::DS));
  bool ds_gaussian = false;
  for (const auto& s : ds.diagnostics.sampled_vars) {
    const SampleStmt* site = gap.sample(s.stmt);
    ds_gaussian = ds_gaussian || (site && std::holds_alternative<GaussianExpr>(site->dist));
  }
  v.detail << "outlier sampled entries=" << draws << " only_o=" << only_o
           << " ds_gap ssi_sampled=" << ssi.diagnostics.sampled_vars.size()
           << " ds_sampled=" << ds.diagnostics.sampled_vars.size();
  v.require(only_o && draws > 0, "outlier samples only o");
  v.require(ssi.diagnostics.sampled_vars.empty(), "SSI samples nothing on ds_gap");
  v.require(ds_gaussian, "DS samples a Gaussian on ds_gap");
}

void annotation_semantics(Verdict& v) {
  DataTable data = read_csv_file(model_path("outlier.csv"));
  CheckedProgram wrong = model("outlier_exact_only.hppl");
  CheckedProgram right = model("outlier.hppl");
  int violations = 0;
  int clean = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    try {
      run(wrong, data, config(1000, seed));
    } catch (const ExactViolation&) {
      ++violations;
    }
    try {
      run(right, data, config(1000, seed));
      ++clean;
    } catch (const ExactViolation&) {
    }
  }
  v.detail << "exact-only violations=" << violations << "/20 annotated clean=" << clean << "/20";
  v.require(violations == 20, "violation on every seed");
  v.require(clean == 20, "no violation with approx o");
}

void analyzer_soundness(Verdict& v) {
  FuzzConfig cfg;
  cfg.seed = 1;
  cfg.programs = 500;
  cfg.seeds = 20;
  cfg.particles = 4;
  const auto start = Clock::now();
  FuzzReport fuzz = soundness_fuzz(cfg);
  const double secs = seconds_since(start);
  int corpus_exact = 0;
  int corpus_verified = 0;
  int corpus_models = 0;
  for (const auto& entry : std::filesystem::directory_iterator(HPPL_MODELS_DIR)) {
    if (entry.path().extension() != ".hppl") continue;
    ++corpus_models;
    CheckedProgram p = model(entry.path().filename().string());
    for (const auto& probe : probe_exactness(p, 20, 100, 7)) {
      if (probe.sampled || probe.runs == 0) continue;
      ++corpus_exact;
      corpus_verified += probe.status == ExactVerdict::Status::Verified;
    }
  }
  const double precision = corpus_exact ? static_cast<double>(corpus_verified) / corpus_exact : 0.0;
  v.detail << "fuzz programs=" << fuzz.programs << " exact=" << fuzz.exact_annotations
           << " verified=" << fuzz.verified << " unsound=" << fuzz.failures.size() << " (" << secs << "s)"
           << " corpus models=" << corpus_models << " precision=" << corpus_verified << "/" << corpus_exact;
  v.require(fuzz.programs >= 500, "500 programs");
  v.require(fuzz.failures.empty(), "no Verified variable sampled");
  v.require(corpus_models >= 10, "10-model corpus");
  v.require(corpus_exact > 0 && precision >= 0.8, "precision at least 80%");
  for (const auto& f : fuzz.failures) std::cerr << "unsound: " << f.var << " at " << f.site << "\n" << f.program;
}

void bounded_memory(Verdict& v) {
  std::vector<std::size_t> peaks;
  for (long long n : {10LL, 100LL, 1000LL}) {
    CheckedProgram p = model("outlier.hppl", {{"N", n}});
    peaks.push_back(run(p, simulate(p, 11), config(200, 1)).diagnostics.peak_live);
  }
  MemoryVerdict outlier = analyze_memory(model("outlier.hppl"));
  std::vector<long long> walk_gaps;
  for (long long n : {10LL, 100LL, 1000LL}) {
    CheckedProgram p = model("random_walk.hppl", {{"N", n}});
    const auto peak = static_cast<long long>(run(p, simulate(p, 11), config(10, 1)).diagnostics.peak_live);
    walk_gaps.push_back(peak - n);
  }
  MemoryVerdict walk = analyze_memory(model("random_walk.hppl"));
  v.detail << "outlier peaks=" << peaks[0] << "," << peaks[1] << "," << peaks[2]
           << " verdict=" << describe(outlier) << " walk peak-N=" << walk_gaps[0] << "," << walk_gaps[1] << ","
           << walk_gaps[2] << " verdict=" << describe(walk);
  v.require(peaks[0] == peaks[1] && peaks[1] == peaks[2] && peaks[0] <= 3, "outlier peak constant and <= 3");
  v.require(outlier.kind == MemoryVerdict::Kind::Bounded && outlier.bound <= 3, "outlier Bounded with bound <= 3");
  bool near = true;
  for (long long g : walk_gaps) near = near && std::abs(g) <= 2;
  v.require(near, "random walk peak within 2 of N");
  v.require(walk.kind == MemoryVerdict::Kind::Unbounded, "random walk Unbounded");
}

std::string capture(const std::string& command) {
  std::string out;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return out;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  ::pclose(pipe);
  return out;
}

void determinism(Verdict& v) {
  const std::string cmd = std::string(HPPL_CLI_PATH) + " infer " + model_path("outlier.hppl") + " --data " +
                          model_path("outlier.csv") + " --particles 5000 --seed 9 --json";
  const std::string a = capture(cmd);
  const std::string b = capture(cmd);
  CheckedProgram p = model("switching.hppl");
  DataTable data = read_csv_file(model_path("switching.csv"));
  RunConfig serial = config(3000, 5);
  RunConfig parallel = serial;
  parallel.threads = 4;
  const bool same_threads = run(p, data, serial) == run(p, data, parallel);
  v.detail << "cli bytes=" << a.size() << " identical=" << (a == b) << " threads 1 vs 4 identical=" << same_threads;
  v.require(!a.empty() && a == b, "byte-identical infer output");
  v.require(same_threads, "thread count does not change results");
}

void conjugacy(Verdict& v) {
  std::mt19937_64 rng(8);
  int failures = 0;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    test::SwapTrial t = test::random_swap_trial(rng, 2 + k % 2);
    worst = std::max(worst, t.max_error);
    if (!t.ok) {
      ++failures;
      std::cerr << "swap trial " << k << ": " << t.description << " error " << t.max_error << "\n";
    }
  }
  v.detail << "trials=1000 failures=" << failures << " worst_rel_err=" << worst;
  v.require(failures == 0, "joint preserved within 1e-9");
}

}  // namespace
}  // namespace hppl

int main() {
  using Check = std::function<void(hppl::Verdict&)>;
  const std::vector<std::pair<const char*, Check>> criteria = {
      {"Kalman exactness", hppl::kalman},
      {"Oracle equivalence", hppl::oracle_equivalence},
      {"Division guarantee", hppl::division_guarantee},
      {"Annotation semantics", hppl::annotation_semantics},
      {"Analyzer soundness", hppl::analyzer_soundness},
      {"Bounded memory", hppl::bounded_memory},
      {"Determinism", hppl::determinism},
      {"Conjugacy algebra", hppl::conjugacy},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    hppl::Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::cout << "criterion " << i + 1 << " " << (v.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << v.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
