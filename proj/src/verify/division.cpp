#include "hppl/verify/division.hpp"

#include <algorithm>

namespace hppl {

AbsVal::Kind join(AbsVal::Kind a, AbsVal::Kind b) {
  using K = AbsVal::Kind;
  if (a == b || b == K::Bottom) return a;
  if (a == K::Bottom) return b;
  return K::Top;
}

AbsVal join(const AbsVal& a, const AbsVal& b) {
  AbsVal out;
  out.kind = join(a.kind, b.kind);
  out.sites = a.sites;
  out.sites.insert(b.sites.begin(), b.sites.end());
  out.deps = a.deps;
  out.deps.insert(b.deps.begin(), b.deps.end());
  return out;
}

bool leq(const AbsVal& a, const AbsVal& b) {
  if (join(a.kind, b.kind) != b.kind) return false;
  return std::includes(b.sites.begin(), b.sites.end(), a.sites.begin(), a.sites.end()) &&
         std::includes(b.deps.begin(), b.deps.end(), a.deps.begin(), a.deps.end());
}

std::string_view to_string(AbsVal::Kind k) {
  switch (k) {
    case AbsVal::Kind::Bottom:
      return "bottom";
    case AbsVal::Kind::LinGauss:
      return "lingauss";
    case AbsVal::Kind::Discrete:
      return "discrete";
    case AbsVal::Kind::Realized:
      return "realized";
    case AbsVal::Kind::Top:
      return "top";
  }
  return "?";
}

std::string_view to_string(ExactVerdict::Status s) {
  switch (s) {
    case ExactVerdict::Status::Verified:
      return "Verified";
    case ExactVerdict::Status::Refuted:
      return "Refuted";
    case ExactVerdict::Status::Unknown:
      return "Unknown";
  }
  return "?";
}

namespace {

void merge_reasons(std::map<StmtId, StmtId>& into, const std::map<StmtId, StmtId>& from) {
  for (const auto& [site, reason] : from) {
    auto [it, fresh] = into.emplace(site, reason);
    if (!fresh) it->second = std::min(it->second, reason);
  }
}

bool keys_included(const std::map<StmtId, StmtId>& a, const std::map<StmtId, StmtId>& b) {
  return std::all_of(a.begin(), a.end(), [&](const auto& kv) { return b.count(kv.first) > 0; });
}

}  // namespace

AbsEnv join(const AbsEnv& a, const AbsEnv& b) {
  AbsEnv out = a;
  for (const auto& [name, v] : b.vars) out.vars[name] = join(out.vars[name], v);
  merge_reasons(out.may_sample, b.may_sample);
  merge_reasons(out.may_block, b.may_block);
  out.must_sample.clear();
  std::set_intersection(a.must_sample.begin(), a.must_sample.end(), b.must_sample.begin(), b.must_sample.end(),
                        std::inserter(out.must_sample, out.must_sample.end()));
  return out;
}

bool leq(const AbsEnv& a, const AbsEnv& b) {
  static const AbsVal bottom;
  for (const auto& [name, v] : a.vars) {
    auto it = b.vars.find(name);
    if (!leq(v, it == b.vars.end() ? bottom : it->second)) return false;
  }
  return keys_included(a.may_sample, b.may_sample) && keys_included(a.may_block, b.may_block);
}

namespace {

class Analyzer {
 public:
  Analyzer(const Compiled& code, std::map<StmtId, AbsEnv>* trace) : code_(code), trace_(trace) {}

  void block(const CBlock& b, AbsEnv& env) {
    for (const CStmt& s : b) stmt(s, env);
  }

  void stmt(const CStmt& s, AbsEnv& env) {
    if (const auto* x = s.as<CSample>()) {
      sample(s, *x, env);
    } else if (const auto* x = s.as<CObserve>()) {
      observe(s, *x, env);
    } else if (const auto* x = s.as<CIf>()) {
      branch(s, *x, env);
    } else {
      loop(*s.as<CFor>(), env);
    }
    if (trace_) (*trace_)[s.id] = env;
  }

  void settle(AbsEnv& env) {
    const AbsVal& r = env.vars[name(code_.result_slot)];
    if (!r.maybe_symbolic()) return;
    for (StmtId d : r.deps) {
      if (is_bernoulli(d)) env.may_block.emplace(d, 0);
    }
  }

 private:
  struct AbsExpr {
    std::set<std::string> vars;
    bool constant = true;
  };

  const std::string& name(int slot) const { return code_.slot_names[static_cast<std::size_t>(slot)]; }

  bool is_bernoulli(StmtId site) const {
    const SampleStmt* s = code_.program->sample(site);
    return s && std::holds_alternative<BernoulliExpr>(s->dist);
  }

  AbsExpr eval(const CExpr& e, AbsEnv& env, StmtId reason) {
    AbsExpr out;
    switch (e.kind) {
      case NumExpr::Kind::Literal:
      case NumExpr::Kind::Datum:
        return out;
      case NumExpr::Kind::Var:
        if (env.vars[name(e.slot)].maybe_symbolic()) {
          out.vars.insert(name(e.slot));
          out.constant = false;
        }
        return out;
      case NumExpr::Kind::Add:
      case NumExpr::Kind::Sub:
      case NumExpr::Kind::Mul:
        break;
    }
    AbsExpr l = eval(e.args[0], env, reason);
    AbsExpr r = eval(e.args[1], env, reason);
    if (e.kind == NumExpr::Kind::Mul && !l.constant && !r.constant) {
      for (const auto& v : l.vars) force(v, env, reason);
    }
    out.vars = l.vars;
    out.vars.insert(r.vars.begin(), r.vars.end());
    out.constant = l.constant && r.constant;
    return out;
  }

  // Hoisting reshapes the dependency graph inside one connected component.
  static void merge_component(AbsEnv& env, const AbsVal& v) {
    std::set<StmtId> component = v.sites;
    component.insert(v.deps.begin(), v.deps.end());
    for (auto& [n, w] : env.vars) {
      if (!w.maybe_symbolic()) continue;
      const bool touches = std::any_of(w.sites.begin(), w.sites.end(), [&](StmtId s) { return component.count(s); }) ||
                           std::any_of(w.deps.begin(), w.deps.end(), [&](StmtId s) { return component.count(s); });
      if (touches) w.deps.insert(component.begin(), component.end());
    }
  }

  void block_on_bernoulli(AbsEnv& env, const AbsVal& v, StmtId reason) {
    for (StmtId d : v.deps) {
      if (is_bernoulli(d)) env.may_block.emplace(d, reason);
    }
  }

  void force(const std::string& var, AbsEnv& env, StmtId reason) {
    if (!env.vars[var].maybe_symbolic()) return;
    merge_component(env, env.vars[var]);
    AbsVal& v = env.vars[var];
    block_on_bernoulli(env, v, reason);
    for (StmtId s : v.sites) env.may_sample.emplace(s, reason);
    v.kind = join(v.kind, AbsVal::Kind::Realized);
  }

  void sample(const CStmt& s, const CSample& x, AbsEnv& env) {
    AbsVal out;
    out.sites = {s.id};
    if (x.gaussian) {
      AbsExpr mean = eval(x.mean, env, s.id);
      AbsExpr var = eval(x.variance, env, s.id);
      if (!var.constant) {
        for (const auto& v : var.vars) force(v, env, s.id);
      }
      out.kind = AbsVal::Kind::LinGauss;
      for (const auto& v : mean.vars) {
        const AbsVal& m = env.vars[v];
        if (!m.maybe_symbolic()) continue;
        out.deps.insert(m.sites.begin(), m.sites.end());
        out.deps.insert(m.deps.begin(), m.deps.end());
      }
    } else {
      out.kind = AbsVal::Kind::Discrete;
    }
    const std::string& target = name(x.slot);
    env.vars[target] = out;
    if (x.ann == Annotation::Approx) {
      force(target, env, s.id);
      env.vars[target].kind = AbsVal::Kind::Realized;
    }
  }

  void observe(const CStmt& s, const CObserve& x, AbsEnv& env) {
    const std::string& subject = name(x.slot);
    if (env.vars[subject].maybe_symbolic()) {
      merge_component(env, env.vars[subject]);
      block_on_bernoulli(env, env.vars[subject], s.id);
    }
    env.vars[subject].kind = AbsVal::Kind::Realized;
  }

  void branch(const CStmt& s, const CIf& x, AbsEnv& env) {
    const AbsVal& c = env.vars[name(x.cond)];
    if (c.maybe_symbolic()) {
      if (c.kind == AbsVal::Kind::Discrete) env.must_sample.insert(c.sites.begin(), c.sites.end());
      std::vector<std::string> forced{name(x.cond)};
      for (int r : x.pre_reads) forced.push_back(name(r));
      for (const auto& v : forced) force(v, env, s.id);
    }
    AbsEnv then_env = env;
    block(x.then_body, then_env);
    AbsEnv else_env = env;
    block(x.else_body, else_env);
    env = join(then_env, else_env);
  }

  void loop(const CFor& x, AbsEnv& env) {
    AbsEnv entry = env;
    AbsVal index;
    index.kind = AbsVal::Kind::Realized;
    entry.vars[name(x.index)] = index;
    if (x.hi < x.lo) {
      env = entry;
      return;
    }
    AbsEnv current = entry;
    for (;;) {
      AbsEnv next = current;
      block(x.body, next);
      AbsEnv widened = join(entry, next);
      // The body runs at least once, so what it certainly draws survives.
      widened.must_sample.insert(next.must_sample.begin(), next.must_sample.end());
      if (widened == current) break;
      current = std::move(widened);
    }
    env = std::move(current);
  }

  const Compiled& code_;
  std::map<StmtId, AbsEnv>* trace_;
};

}  // namespace

AbsEnv transfer(const Compiled& code, const CStmt& stmt, AbsEnv in) {
  Analyzer a(code, nullptr);
  a.stmt(stmt, in);
  return in;
}

bool DivisionResult::all_verified() const {
  return std::all_of(exact.begin(), exact.end(),
                     [](const ExactVerdict& v) { return v.status == ExactVerdict::Status::Verified; });
}

DivisionResult analyze_division(const CheckedProgram& program) {
  Compiled code = compile(program);
  DivisionResult out;
  Analyzer a(code, &out.trace);
  AbsEnv env;
  a.block(code.body, env);
  a.settle(env);

  auto describe_reason = [&](StmtId reason) {
    return reason == 0 ? "result " + program.program().result : describe(program.stmt(reason));
  };
  for (StmtId site : program.annotated(Annotation::Exact)) {
    ExactVerdict v;
    v.var = program.sample(site)->target;
    v.site = site;
    if (auto it = env.may_sample.find(site); it != env.may_sample.end()) {
      v.status = ExactVerdict::Status::Refuted;
      v.reason = it->second;
      v.reason_text = describe_reason(it->second);
    } else if (auto jt = env.may_block.find(site); jt != env.may_block.end()) {
      v.status = ExactVerdict::Status::Unknown;
      v.reason = jt->second;
      v.reason_text = describe_reason(jt->second);
    }
    out.exact.push_back(std::move(v));
  }
  for (StmtId id = 1; id <= static_cast<StmtId>(program.stmt_count()); ++id) {
    const SampleStmt* s = program.sample(id);
    if (!s || s->ann != Annotation::None || !std::holds_alternative<GaussianExpr>(s->dist)) continue;
    if (!env.may_sample.count(id) && !env.may_block.count(id)) out.inferred_exact.push_back(id);
  }
  out.final_env = std::move(env);
  return out;
}

}  // namespace hppl
