#include "hppl/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include "hppl/lang/parser.hpp"
#include "hppl/lang/validate.hpp"
#include "hppl/runtime/inference.hpp"
#include "hppl/runtime/result_json.hpp"
#include "hppl/symbolic/affine.hpp"
#include "hppl/verify/division.hpp"
#include "hppl/verify/memory.hpp"
#include "hppl/verify/verdict_json.hpp"

namespace hppl {

namespace {

namespace fs = std::filesystem;

class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_source(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<std::string, long long> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == 0 || eq == std::string::npos) throw CLI::ValidationError("--set", "expected NAME=INT, got '" + text + "'");
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text.substr(eq + 1), &used);
    if (used != text.size() - eq - 1) throw std::invalid_argument(text);
    return {text.substr(0, eq), v};
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--set", "expected NAME=INT, got '" + text + "'");
  }
}

ConstOverrides parse_sets(const std::vector<std::string>& sets) {
  ConstOverrides out;
  for (const auto& s : sets) {
    auto [name, value] = parse_assignment(s);
    out.insert_or_assign(std::move(name), value);
  }
  return out;
}

std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t value) {
  if (flag->count() > 0) return value;
  if (const char* env = std::getenv("HYBRID_INFER_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (env[used] == '\0') return v;
    } catch (const std::logic_error&) {
    }
    throw EnvironmentError(std::string("HYBRID_INFER_SEED is not an unsigned integer: '") + env + "'");
  }
  return 1;
}

/// Parses and validates. Reports problems on `err` and returns nothing when
/// the program is not clean.
std::optional<CheckedProgram> load(const std::string& path, const std::string& text, const ConstOverrides& sets,
                                   std::ostream& err) {
  Program ast;
  try {
    ast = parse(text);
  } catch (const ParseError& e) {
    err << path << ":" << e.loc().line << ":" << e.loc().column << ": ParseError: " << e.what() << "\n";
    return std::nullopt;
  }
  ValidationResult r = validate(ast, sets);
  for (const auto& e : r.errors) {
    err << path << ":" << e.loc.line << ":" << e.loc.column << ": " << e.rule << ": " << e.message << "\n";
  }
  if (!r.ok()) return std::nullopt;
  return std::move(r.checked);
}

std::string num(double v) { return format_g17(v); }

struct Common {
  std::string model;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("model", c.model, "Model source (.hppl)")->required();
  cmd->add_option("--set", c.sets, "Override a constant, e.g. N=100")->take_all();
}

int cmd_check(const Common& c, std::ostream& out, std::ostream& err) {
  const std::string text = read_source(c.model);
  std::optional<CheckedProgram> p = load(c.model, text, parse_sets(c.sets), err);
  if (!p) return kExitFailure;
  for (const auto& note : p->notes()) out << c.model << ": note: " << note << "\n";
  out << c.model << ": ok\n";
  return kExitOk;
}

struct AnalyzeOpts {
  Common common;
  bool strict = false;
  bool json = false;
  int m_max = 3;
};

int cmd_analyze(const AnalyzeOpts& o, std::ostream& out, std::ostream& err) {
  const std::string text = read_source(o.common.model);
  std::optional<CheckedProgram> p = load(o.common.model, text, parse_sets(o.common.sets), err);
  if (!p) return kExitFailure;
  DivisionResult division = analyze_division(*p);
  MemConfig mem_cfg;
  mem_cfg.m_max = o.m_max;
  MemoryVerdict memory = analyze_memory(*p, mem_cfg);
  if (o.json) {
    out << to_json(division, memory).dump() << "\n";
  } else {
    std::map<std::string, int> uses;
    for (const auto& v : division.exact) ++uses[v.var];
    for (const auto& v : division.exact) {
      std::string label = v.var;
      if (uses[v.var] > 1) label += " (line " + std::to_string(p->stmt(v.site).loc.line) + ")";
      out << label << ": " << to_string(v.status);
      if (v.status != ExactVerdict::Status::Verified) out << " at " << v.reason_text;
      out << "\n";
    }
    out << "memory: " << describe(memory);
    if (!memory.detail.empty()) out << " (" << memory.detail << ")";
    out << "\n";
  }
  const bool clean = division.all_verified() && memory.kind == MemoryVerdict::Kind::Bounded;
  return o.strict && !clean ? kExitFailure : kExitOk;
}

struct InferOpts {
  Common common;
  std::string data;
  std::string engine = "ssi";
  std::size_t particles = 1000;
  std::uint64_t seed = 1;
  CLI::Option* seed_flag = nullptr;
  double threshold = 0.5;
  unsigned threads = 1;
  bool json = false;
  bool allow_violations = false;
};

DataTable load_data(const std::string& path) { return path.empty() ? DataTable{} : read_csv_file(path); }

void print_summary(const InferenceResult& r, std::ostream& out) {
  out << "mean: " << num(r.mean()) << "\n";
  out << "variance: " << num(r.variance()) << "\n";
  out << "log_evidence: " << num(r.log_evidence) << "\n";
  out << "peak_live: " << r.diagnostics.peak_live << "\n";
  std::map<std::pair<StmtId, std::string>, int> counts;
  for (const auto& s : r.diagnostics.sampled_vars) ++counts[{s.stmt, s.name}];
  out << "sampled_vars:";
  if (counts.empty()) out << " none";
  for (const auto& [key, n] : counts) {
    out << " " << key.second << "@" << key.first << "x" << n;
  }
  out << "\n";
}

int cmd_infer(const InferOpts& o, std::ostream& out, std::ostream& err) {
  const std::string text = read_source(o.common.model);
  std::optional<CheckedProgram> p = load(o.common.model, text, parse_sets(o.common.sets), err);
  if (!p) return kExitFailure;
  const DataTable data = load_data(o.data);
  RunConfig cfg;
  cfg.particles = o.particles;
  cfg.seed = resolve_seed(o.seed_flag, o.seed);
  cfg.resample_threshold = o.threshold;
  cfg.engine = parse_engine(o.engine);
  cfg.threads = o.threads;
  cfg.enforce_exact = !o.allow_violations;
  InferenceResult r = run(*p, data, cfg);
  if (o.json) {
    out << to_json(r).dump() << "\n";
  } else {
    print_summary(r, out);
  }
  return kExitOk;
}

struct OracleOpts {
  Common common;
  std::string data;
  std::string compare;
  double tol = 0.05;
  int max_discrete = 20;
  bool json = false;
};

int cmd_oracle(const OracleOpts& o, std::ostream& out, std::ostream& err) {
  const std::string text = read_source(o.common.model);
  std::optional<CheckedProgram> p = load(o.common.model, text, parse_sets(o.common.sets), err);
  if (!p) return kExitFailure;
  const DataTable data = load_data(o.data);
  OracleResult exact = oracle_posterior(*p, data, o.max_discrete);
  if (o.json) {
    out << to_json(exact).dump() << "\n";
  } else {
    out << "mean: " << num(exact.mean()) << "\n";
    out << "variance: " << num(exact.variance()) << "\n";
    out << "log_evidence: " << num(exact.log_evidence) << "\n";
    out << "components: " << exact.mixture.size() << "\n";
  }
  if (o.compare.empty()) return kExitOk;
  nlohmann::json approx;
  try {
    approx = nlohmann::json::parse(read_source(o.compare));
  } catch (const nlohmann::json::exception& e) {
    throw EnvironmentError("cannot read inference result '" + o.compare + "': " + e.what());
  }
  const auto field = [&](const char* key) {
    if (!approx.contains(key) || !approx[key].is_number()) {
      throw EnvironmentError("inference result '" + o.compare + "' has no numeric '" + key + "'");
    }
    return approx[key].get<double>();
  };
  const double mean_error = std::abs(field("mean") - exact.mean());
  const double evidence_error = std::abs(field("log_evidence") - exact.log_evidence);
  const bool ok = mean_error <= o.tol && evidence_error <= o.tol;
  out << "mean_error: " << num(mean_error) << "\n";
  out << "log_evidence_error: " << num(evidence_error) << "\n";
  out << "tolerance: " << o.tol << (ok ? " (ok)" : " (exceeded)") << "\n";
  return ok ? kExitOk : kExitFailure;
}

struct BenchOpts {
  std::string models;
  std::string engines = "ssi";
  std::string sweep;
  std::size_t particles = 1000;
  int seeds = 1;
  std::uint64_t seed = 1;
  CLI::Option* seed_flag = nullptr;
  std::string out;
  unsigned threads = 1;
  bool allow_violations = false;
};

struct BenchRow {
  std::string model;
  std::string engine;
  std::optional<long long> n;
  std::uint64_t seed = 0;
  std::size_t particles = 0;
  std::size_t peak_live = 0;
  double wall_ms = 0.0;
  InferenceResult result;

  auto key() const { return std::tie(model, engine, n, seed); }
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_bench(const BenchOpts& o, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(o.models)) throw EnvironmentError("not a directory: '" + o.models + "'");
  std::vector<Engine> engines;
  for (const auto& e : split(o.engines, ',')) engines.push_back(parse_engine(e));
  std::string sweep_name;
  std::vector<std::optional<long long>> sweep{std::nullopt};
  if (!o.sweep.empty()) {
    const auto eq = o.sweep.find('=');
    if (eq == 0 || eq == std::string::npos) throw CLI::ValidationError("--sweep", "expected NAME=v1,v2,...");
    sweep_name = o.sweep.substr(0, eq);
    sweep.clear();
    for (const auto& v : split(o.sweep.substr(eq + 1), ',')) sweep.push_back(parse_assignment(sweep_name + "=" + v).second);
  }
  const std::uint64_t base_seed = resolve_seed(o.seed_flag, o.seed);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.models)) {
    if (entry.is_regular_file() && entry.path().extension() == ".hppl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<BenchRow> rows;
  bool failed = false;
  for (const fs::path& file : files) {
    const std::string model = file.stem().string();
    const std::string text = read_source(file.string());
    fs::path csv = file;
    csv.replace_extension(".csv");
    std::optional<DataTable> shipped;
    if (fs::exists(csv)) shipped = read_csv_file(csv.string());
    for (Engine engine : engines) {
      for (const auto& n : sweep) {
        ConstOverrides sets;
        if (n) sets[sweep_name] = *n;
        std::ostringstream diag;
        std::optional<CheckedProgram> p = load(file.string(), text, sets, diag);
        if (!p) {
          err << diag.str();
          failed = true;
          continue;
        }
        std::optional<long long> shown = n;
        if (!shown && p->constants().count("N")) shown = p->constants().at("N");
        for (int j = 0; j < o.seeds; ++j) {
          BenchRow row;
          row.model = model;
          row.engine = to_string(engine);
          row.n = shown;
          row.seed = base_seed + static_cast<std::uint64_t>(j);
          row.particles = o.particles;
          RunConfig cfg;
          cfg.particles = o.particles;
          cfg.seed = row.seed;
          cfg.engine = engine;
          cfg.threads = o.threads;
          cfg.enforce_exact = !o.allow_violations;
          try {
            DataTable data = shipped ? *shipped : simulate(*p, row.seed);
            const auto start = std::chrono::steady_clock::now();
            try {
              row.result = run(*p, data, cfg);
            } catch (const DataError&) {
              if (!shipped) throw;
              data = simulate(*p, row.seed);
              row.result = run(*p, data, cfg);
            }
            row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            row.peak_live = row.result.diagnostics.peak_live;
            rows.push_back(std::move(row));
          } catch (const std::exception& e) {
            err << model << " " << row.engine << " " << (shown ? std::to_string(*shown) : "-") << " seed "
                << row.seed << ": " << e.what() << "\n";
            failed = true;
          }
        }
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) { return a.key() < b.key(); });

  std::ostringstream csv;
  csv << "model,engine,N,particles,seed,peak_live,wall_ms,posterior_mean,posterior_var,log_evidence\n";
  for (const auto& r : rows) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
    csv << r.model << "," << r.engine << "," << (r.n ? std::to_string(*r.n) : "") << "," << r.particles << ","
        << r.seed << "," << r.peak_live << "," << wall << "," << num(r.result.mean()) << ","
        << num(r.result.variance()) << "," << num(r.result.log_evidence) << "\n";
  }
  if (o.out.empty()) {
    out << csv.str();
  } else {
    std::ofstream file(o.out);
    if (!(file << csv.str())) throw EnvironmentError("cannot write '" + o.out + "'");
  }
  return failed ? kExitFailure : kExitOk;
}

struct SimulateOpts {
  Common common;
  std::uint64_t seed = 1;
  CLI::Option* seed_flag = nullptr;
  std::string out;
};

int cmd_simulate(const SimulateOpts& o, std::ostream& out, std::ostream& err) {
  const std::string text = read_source(o.common.model);
  std::optional<CheckedProgram> p = load(o.common.model, text, parse_sets(o.common.sets), err);
  if (!p) return kExitFailure;
  const DataTable data = simulate(*p, resolve_seed(o.seed_flag, o.seed));
  if (o.out.empty()) {
    write_csv(out, data);
  } else {
    std::ofstream file(o.out);
    write_csv(file, data);
    if (!file) throw EnvironmentError("cannot write '" + o.out + "'");
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Particle inference with symbolic exact handling of linear-Gaussian variables", "hybrid-infer"};
  app.require_subcommand(1, 1);
  const auto engine_check = CLI::IsMember({"ssi", "ds"});

  Common check;
  CLI::App* check_cmd = app.add_subcommand("check", "Parse and validate a model");
  add_common(check_cmd, check);

  AnalyzeOpts analyze;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Verify exact annotations and memory boundedness");
  add_common(analyze_cmd, analyze.common);
  analyze_cmd->add_flag("--strict", analyze.strict, "Exit 1 unless every verdict is Verified and memory Bounded");
  analyze_cmd->add_option("--m-max", analyze.m_max, "Largest lookback accepted for Bounded")
      ->check(CLI::Range(1, 64));
  analyze_cmd->add_flag("--json", analyze.json, "Print verdicts as JSON");

  InferOpts infer;
  CLI::App* infer_cmd = app.add_subcommand("infer", "Run the particle filter");
  add_common(infer_cmd, infer.common);
  infer_cmd->add_option("--data", infer.data, "CSV with one column per model parameter");
  infer_cmd->add_option("--engine", infer.engine, "ssi or ds")->check(engine_check);
  infer_cmd->add_option("--particles", infer.particles, "Number of particles")->check(CLI::PositiveNumber);
  infer.seed_flag = infer_cmd->add_option("--seed", infer.seed, "Random seed (default: $HYBRID_INFER_SEED or 1)");
  infer_cmd->add_option("--resample-threshold", infer.threshold, "Resample when ESS/n falls below this")
      ->check(CLI::Range(0.0, 1.0));
  infer_cmd->add_option("--threads", infer.threads, "Worker threads")->check(CLI::Range(1u, 256u));
  infer_cmd->add_flag("--json", infer.json, "Print the result as JSON");
  infer_cmd->add_flag("--allow-violations", infer.allow_violations, "Sample exact variables instead of failing");

  OracleOpts oracle;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Exact posterior by enumerating Bernoulli draws");
  add_common(oracle_cmd, oracle.common);
  oracle_cmd->add_option("--data", oracle.data, "CSV with one column per model parameter");
  oracle_cmd->add_option("--compare", oracle.compare, "JSON written by `infer --json`");
  oracle_cmd->add_option("--tol", oracle.tol, "Largest accepted absolute error")->check(CLI::NonNegativeNumber);
  oracle_cmd->add_option("--max-discrete", oracle.max_discrete, "Largest number of enumerated draws")
      ->check(CLI::Range(0, 30));
  oracle_cmd->add_flag("--json", oracle.json, "Print the mixture as JSON");

  BenchOpts bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Run every model in a directory and write CSV");
  bench_cmd->add_option("--models", bench.models, "Directory of .hppl models")->required();
  bench_cmd->add_option("--engines", bench.engines, "Comma-separated engines");
  bench_cmd->add_option("--sweep", bench.sweep, "Constant to sweep, e.g. N=10,100,1000");
  bench_cmd->add_option("--particles", bench.particles, "Number of particles")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seeds", bench.seeds, "Seeds per configuration")->check(CLI::PositiveNumber);
  bench.seed_flag = bench_cmd->add_option("--seed", bench.seed, "First seed (default: $HYBRID_INFER_SEED or 1)");
  bench_cmd->add_option("--out", bench.out, "Output CSV (default: stdout)");
  bench_cmd->add_option("--threads", bench.threads, "Worker threads")->check(CLI::Range(1u, 256u));
  bench_cmd->add_flag("--allow-violations", bench.allow_violations, "Sample exact variables instead of failing");

  SimulateOpts sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Forward-sample observation data as CSV");
  add_common(sim_cmd, sim.common);
  sim.seed_flag = sim_cmd->add_option("--seed", sim.seed, "Random seed (default: $HYBRID_INFER_SEED or 1)");
  sim_cmd->add_option("--out", sim.out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitEnvironment;
  }

  try {
    if (check_cmd->parsed()) return cmd_check(check, out, err);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze, out, err);
    if (infer_cmd->parsed()) return cmd_infer(infer, out, err);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle, out, err);
    if (bench_cmd->parsed()) return cmd_bench(bench, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out, err);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const EnvironmentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const DataError& e) {
    err << "DataError: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const ExactViolation& e) {
    err << e.what() << " (forced by " << e.cause() << ")\n";
    return kExitFailure;
  } catch (const AllParticlesDead& e) {
    err << "AllParticlesDead: " << e.what() << "\n";
    return kExitFailure;
  } catch (const OracleError& e) {
    err << (e.kind() == OracleError::Kind::TooManyDiscrete ? "TooManyDiscrete: " : "NonEnumerable: ") << e.what()
        << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitEnvironment;
}

}  // namespace hppl
