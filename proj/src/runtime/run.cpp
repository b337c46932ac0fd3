#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "hppl/runtime/compile.hpp"
#include "hppl/runtime/inference.hpp"
#include "hppl/runtime/interpreter.hpp"

namespace hppl {

std::string_view to_string(Engine e) { return e == Engine::SSI ? "ssi" : "ds"; }

Engine parse_engine(std::string_view text) {
  if (text == "ssi") return Engine::SSI;
  if (text == "ds") return Engine::DS;
  throw std::invalid_argument("unknown engine '" + std::string(text) + "' (expected ssi or ds)");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kResampleStream = ~0ULL;

double component_variance(const PosteriorComponent& c) {
  switch (c.kind) {
    case PosteriorComponent::Kind::Gaussian:
      return c.variance;
    case PosteriorComponent::Kind::Value:
      return 0.0;
    case PosteriorComponent::Kind::Bernoulli:
      return c.mean * (1.0 - c.mean);
  }
  return 0.0;
}

class Filter {
 public:
  Filter(const CheckedProgram& program, const DataTable& data, const RunConfig& cfg)
      : cfg_(cfg),
        code_(compile(program)),
        interp_(code_, bind_columns(program, data),
                ExecOptions{.engine = cfg.engine, .enforce_exact = cfg.enforce_exact}) {
    if (cfg.particles < 1) throw std::invalid_argument("particle count must be at least 1");
    particles_.reserve(cfg.particles);
    for (std::size_t i = 0; i < cfg.particles; ++i) {
      particles_.push_back(interp_.make_particle(Stream(Stream::derive(cfg.seed, 0, i))));
    }
  }

  InferenceResult run() {
    run_block(code_.body, 0, 0);
    for_each([&](Particle& p, ExecCtx& ctx) {
      if (p.logw != kNegInf) interp_.settle_result(p, ctx);
    });
    InferenceResult out;
    if (live_trace_.empty()) {
      for (auto& p : particles_) {
        interp_.collect(p);
        peak_ = std::max(peak_, interp_.live_count(p));
      }
    }
    const double top = max_logw();
    if (top == kNegInf) throw AllParticlesDead("every particle has zero weight", diagnostics());
    double total = 0.0;
    for (const auto& p : particles_) total += std::exp(p.logw - top);
    log_z_ += top + std::log(total) - std::log(static_cast<double>(particles_.size()));
    std::map<std::tuple<PosteriorComponent::Kind, double, double>, std::size_t> index;
    for (const auto& p : particles_) {
      if (p.logw == kNegInf) continue;
      PosteriorComponent c = interp_.summarize(p);
      c.weight = std::exp(p.logw - top) / total;
      auto [it, fresh] = index.try_emplace({c.kind, c.mean, c.variance}, out.posterior.size());
      if (fresh) {
        out.posterior.push_back(c);
      } else {
        out.posterior[it->second].weight += c.weight;
      }
    }
    out.log_evidence = log_z_;
    out.diagnostics = diagnostics();
    return out;
  }

 private:
  Diagnostics diagnostics() const {
    Diagnostics d;
    d.sampled_vars.assign(sampled_.begin(), sampled_.end());
    d.live_trace = live_trace_;
    d.peak_live = peak_;
    return d;
  }

  double max_logw() const {
    double top = kNegInf;
    for (const auto& p : particles_) top = std::max(top, p.logw);
    return top;
  }

  // Applies `fn` to every particle, possibly in parallel. Errors are
  // rethrown for the lowest particle index, so the outcome does not
  // depend on the thread count.
  template <typename F>
  void for_each(F&& fn) {
    const std::size_t n = particles_.size();
    const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(cfg_.threads, n));
    std::vector<std::vector<SampledVar>> logs(threads);
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::size_t> error_at(threads, n);
    auto work = [&](std::size_t t) {
      const std::size_t lo = n * t / threads;
      const std::size_t hi = n * (t + 1) / threads;
      ExecCtx ctx;
      ctx.sampled = &logs[t];
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          fn(particles_[i], ctx);
        } catch (...) {
          errors[t] = std::current_exception();
          error_at[t] = i;
          return;
        }
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    for (const auto& log : logs) sampled_.insert(log.begin(), log.end());
    std::size_t first = n;
    std::exception_ptr err;
    for (std::size_t t = 0; t < threads; ++t) {
      if (errors[t] && error_at[t] < first) {
        first = error_at[t];
        err = errors[t];
      }
    }
    if (err) std::rethrow_exception(err);
  }

  void run_block(const CBlock& block, int iteration, int depth) {
    for (const CStmt& s : block) {
      if (const auto* loop = s.as<CFor>()) {
        for (long long k = loop->lo; k <= loop->hi; ++k) {
          for (auto& p : particles_) interp_.enter_iteration(p, *loop, k);
          run_block(loop->body, static_cast<int>(k - loop->lo + 1), depth + 1);
          std::size_t live = 0;
          for (auto& p : particles_) {
            interp_.collect(p);
            if (depth == 0) live = std::max(live, interp_.live_count(p));
          }
          if (depth == 0) {
            live_trace_.push_back(live);
            peak_ = std::max(peak_, live);
          }
        }
        continue;
      }
      for_each([&](Particle& p, ExecCtx& ctx) {
        if (p.logw == kNegInf) return;
        ctx.iteration = iteration;
        interp_.exec_stmt(p, s, ctx);
      });
      if (s.has_observe) maybe_resample();
    }
  }

  void maybe_resample() {
    const double top = max_logw();
    if (top == kNegInf) throw AllParticlesDead("every particle has zero weight", diagnostics());
    const std::size_t n = particles_.size();
    std::vector<double> w(n);
    double total = 0.0;
    double squares = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = std::exp(particles_[i].logw - top);
      total += w[i];
      squares += w[i] * w[i];
    }
    const double ess = total * total / squares;
    if (!(ess < cfg_.resample_threshold * static_cast<double>(n))) return;

    log_z_ += top + std::log(total) - std::log(static_cast<double>(n));
    ++generation_;
    Stream r(Stream::derive(cfg_.seed, generation_, kResampleStream));
    std::vector<std::size_t> pick = systematic_indices(w, r.uniform01());
    std::vector<std::size_t> uses(n, 0);
    for (std::size_t s : pick) ++uses[s];
    std::vector<Particle> next;
    next.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t s = pick[j];
      if (--uses[s] == 0) {
        next.push_back(std::move(particles_[s]));
      } else {
        next.push_back(particles_[s]);
      }
      next.back().logw = 0.0;
      next.back().rng = Stream(Stream::derive(cfg_.seed, generation_, j));
    }
    particles_ = std::move(next);
  }

  const RunConfig& cfg_;
  Compiled code_;
  Interpreter interp_;
  std::vector<Particle> particles_;
  std::set<SampledVar> sampled_;
  std::vector<std::size_t> live_trace_;
  std::size_t peak_ = 0;
  double log_z_ = 0.0;
  std::uint64_t generation_ = 0;
};

}  // namespace

std::vector<std::size_t> systematic_indices(const std::vector<double>& weights, double u) {
  const std::size_t n = weights.size();
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<std::size_t> pick(n);
  if (n == 0) return pick;
  double cumulative = weights[0] / total;
  std::size_t src = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double pos = (u + static_cast<double>(j)) / static_cast<double>(n);
    while (pos > cumulative && src + 1 < n) {
      ++src;
      cumulative += weights[src] / total;
    }
    pick[j] = src;
  }
  return pick;
}

double InferenceResult::mean() const {
  double m = 0.0;
  for (const auto& c : posterior) m += c.weight * c.mean;
  return m;
}

double InferenceResult::variance() const {
  const double m = mean();
  double v = 0.0;
  for (const auto& c : posterior) {
    if (c.weight == 0.0) continue;
    v += c.weight * (component_variance(c) + (c.mean - m) * (c.mean - m));
  }
  return v;
}

InferenceResult run(const CheckedProgram& program, const DataTable& data, const RunConfig& cfg) {
  if (cfg.n_override) {
    ConstOverrides overrides(program.constants().begin(), program.constants().end());
    overrides["N"] = *cfg.n_override;
    ValidationResult r = validate(program.program(), overrides);
    if (!r.ok()) throw std::invalid_argument(r.errors.front().message);
    return Filter(*r.checked, data, cfg).run();
  }
  return Filter(program, data, cfg).run();
}

}  // namespace hppl
