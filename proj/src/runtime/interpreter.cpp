#include "hppl/runtime/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hppl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string violation_text(const std::string& variable, int line, int iteration) {
  std::string out = "ExactViolation: " + variable + " at line " + std::to_string(line);
  if (iteration > 0) out += ", iteration " + std::to_string(iteration);
  return out;
}

}  // namespace

ExactViolation::ExactViolation(std::string variable, StmtId stmt, int line, int iteration, std::string cause)
    : std::runtime_error(violation_text(variable, line, iteration)),
      variable_(std::move(variable)),
      stmt_(stmt),
      line_(line),
      iteration_(iteration),
      cause_(std::move(cause)) {}

std::vector<const std::vector<double>*> bind_columns(const CheckedProgram& program, const DataTable& data) {
  std::vector<const std::vector<double>*> out;
  for (const auto& name : program.program().params) out.push_back(data.has(name) ? &data.column(name) : nullptr);
  return out;
}

Interpreter::Interpreter(const Compiled& code, std::vector<const std::vector<double>*> columns, ExecOptions options)
    : code_(code), columns_(std::move(columns)), options_(options) {
  columns_.resize(code_.program->program().params.size(), nullptr);
}

Particle Interpreter::make_particle(Stream rng) const {
  Particle p;
  p.env.resize(code_.slot_count());
  p.rng = rng;
  return p;
}

std::vector<NodeId> Interpreter::roots(const Particle& p) const {
  std::vector<NodeId> out;
  out.reserve(p.env.size());
  for (const Slot& s : p.env) {
    if (s.kind == Slot::Kind::Node) out.push_back(s.id);
  }
  return out;
}

void Interpreter::collect(Particle& p) const {
  std::vector<NodeId> r = roots(p);
  p.state.collect(r);
}

std::size_t Interpreter::live_count(const Particle& p) const {
  std::vector<NodeId> r = roots(p);
  return p.state.live_count(r);
}

double Interpreter::datum(int param, long long row) const {
  if (options_.zero_data) return 0.0;
  const auto& name = code_.program->program().params[static_cast<std::size_t>(param)];
  const std::vector<double>* col = columns_[static_cast<std::size_t>(param)];
  if (!col) throw DataError("no data for parameter '" + name + "'");
  if (row < 1 || static_cast<std::size_t>(row) > col->size()) {
    throw DataError("data for '" + name + "' has " + std::to_string(col->size()) + " rows; row " +
                    std::to_string(row) + " requested");
  }
  return (*col)[static_cast<std::size_t>(row - 1)];
}

long long Interpreter::eval_int(const Particle& p, const CInt& e) const {
  if (!e.is_slot) return e.value;
  const Slot& s = p.env[static_cast<std::size_t>(e.slot)];
  if (s.kind != Slot::Kind::Real) throw std::logic_error("index slot is not bound to an integer");
  return static_cast<long long>(s.value);
}

AffineExpr Interpreter::eval(Particle& p, const CExpr& e, ExecCtx& ctx, StmtId reason) const {
  switch (e.kind) {
    case NumExpr::Kind::Literal:
      return AffineExpr(e.value);
    case NumExpr::Kind::Var: {
      const Slot& s = p.env[static_cast<std::size_t>(e.slot)];
      if (s.kind == Slot::Kind::Real) return AffineExpr(s.value);
      if (s.kind == Slot::Kind::Unbound) throw std::logic_error("read of unbound '" + code_.slot_names[e.slot] + "'");
      const Node& n = p.state.node(s.id);
      if (const auto* d = std::get_if<DeltaDist>(&n.dist)) return AffineExpr(d->value);
      return AffineExpr::variable(s.id);
    }
    case NumExpr::Kind::Datum:
      return AffineExpr(datum(e.param, eval_int(p, e.index)));
    case NumExpr::Kind::Add:
      return eval(p, e.args[0], ctx, reason) + eval(p, e.args[1], ctx, reason);
    case NumExpr::Kind::Sub:
      return eval(p, e.args[0], ctx, reason) - eval(p, e.args[1], ctx, reason);
    case NumExpr::Kind::Mul:
      break;
  }
  AffineExpr l = eval(p, e.args[0], ctx, reason);
  AffineExpr r = eval(p, e.args[1], ctx, reason);
  if (l.is_constant()) return r * l.intercept();
  if (r.is_constant()) return l * r.intercept();
  force_all(p, l, ctx, reason);
  l = eval(p, e.args[0], ctx, reason);
  r = eval(p, e.args[1], ctx, reason);
  if (l.is_constant()) return r * l.intercept();
  return l * r.intercept();
}

void Interpreter::force_all(Particle& p, const AffineExpr& e, ExecCtx& ctx, StmtId reason) const {
  std::vector<NodeId> ids;
  for (const auto& t : e.terms()) ids.push_back(t.node);
  for (NodeId id : ids) force(p, id, ctx, reason);
}

double Interpreter::draw(Particle& p, NodeId id, ExecCtx& ctx) const {
  const Node& n = p.state.node(id);
  if (options_.draw == DrawMode::Random) return p.state.sample_root(id, p.rng);
  if (n.is_gaussian()) {
    if (options_.draw == DrawMode::Shape) return 0.5;
    throw OracleError(OracleError::Kind::NonEnumerable,
                      "'" + code_.program->sample(n.origin.stmt)->target + "' at line " +
                          std::to_string(code_.program->stmt(n.origin.stmt).loc.line) +
                          " would be sampled from a Gaussian");
  }
  const double prob = std::get<BernoulliDist>(n.dist).prob;
  Tape& tape = *ctx.tape;
  const std::size_t pos = tape.taken.size();
  if (pos >= tape.limit) {
    throw OracleError(OracleError::Kind::TooManyDiscrete,
                      "more than " + std::to_string(tape.limit) + " Bernoulli draws");
  }
  int c = pos < tape.prefix.size() ? tape.prefix[pos] : (prob >= 1.0 ? 1 : 0);
  tape.taken.push_back(c);
  tape.probs.push_back(prob);
  if (options_.draw == DrawMode::Enumerate) p.logw += c ? std::log(prob) : std::log1p(-prob);
  return c;
}

double Interpreter::force(Particle& p, NodeId id, ExecCtx& ctx, StmtId reason) const {
  while (true) {
    const Node& n = p.state.node(id);
    if (const auto* d = std::get_if<DeltaDist>(&n.dist)) return d->value;
    auto blocked = p.state.hoist(id);
    if (!blocked) break;
    force(p, blocked->by, ctx, reason);
  }
  const Node& n = p.state.node(id);
  const Origin origin = n.origin;
  const std::string& name = code_.program->sample(origin.stmt)->target;
  if (n.ann == Annotation::Exact && options_.enforce_exact) {
    std::string cause = reason == 0 ? "result " + code_.program->program().result
                                    : describe(code_.program->stmt(reason));
    throw ExactViolation(name, origin.stmt, code_.program->stmt(origin.stmt).loc.line, origin.iteration,
                         std::move(cause));
  }
  double v = draw(p, id, ctx);
  p.state.realize(id, v);
  if (ctx.sampled) ctx.sampled->push_back(SampledVar{name, origin.stmt, origin.iteration});
  return v;
}

namespace {

AffineExpr fold_realized(const SymbolicState& s, const AffineExpr& e) {
  AffineExpr out(e.intercept());
  for (const auto& t : e.terms()) {
    if (const auto* d = std::get_if<DeltaDist>(&s.node(t.node).dist)) {
      out.set_intercept(out.intercept() + t.coef * d->value);
    } else {
      out.add_term(t.node, t.coef);
    }
  }
  return out;
}

}  // namespace

AffineExpr Interpreter::chain_restrict(Particle& p, AffineExpr mean, ExecCtx& ctx, StmtId reason) const {
  std::vector<NodeId> gaussians;
  std::vector<NodeId> extra;
  for (const auto& t : mean.terms()) {
    if (p.state.node(t.node).is_bernoulli()) {
      extra.push_back(t.node);
    } else {
      gaussians.push_back(t.node);
    }
  }
  if (gaussians.size() > 1) extra.insert(extra.end(), gaussians.begin(), gaussians.end() - 1);
  if (extra.empty()) return mean;
  std::sort(extra.begin(), extra.end());
  for (NodeId id : extra) force(p, id, ctx, reason);
  return fold_realized(p.state, mean);
}

void Interpreter::chain_policy(Particle& p, NodeId subject, ExecCtx& ctx, StmtId reason) const {
  const auto* g = std::get_if<GaussianDist>(&p.state.node(subject).dist);
  if (!g) return;
  AffineExpr mean = g->mean;
  chain_restrict(p, std::move(mean), ctx, reason);
}

void Interpreter::exec_sample(Particle& p, const CStmt& s, const CSample& x, ExecCtx& ctx) const {
  NodeId id;
  const Origin origin{s.id, ctx.iteration};
  if (x.gaussian) {
    AffineExpr mean = eval(p, x.mean, ctx, s.id);
    AffineExpr var = eval(p, x.variance, ctx, s.id);
    if (!var.is_constant()) {
      force_all(p, var, ctx, s.id);
      var = eval(p, x.variance, ctx, s.id);
    }
    mean = fold_realized(p.state, mean);
    if (options_.engine == Engine::DS) mean = chain_restrict(p, std::move(mean), ctx, s.id);
    id = p.state.assume(GaussianDist{std::move(mean), var.intercept()}, x.ann, origin);
  } else {
    id = p.state.assume(BernoulliDist{x.prob}, x.ann, origin);
  }
  Slot& slot = p.env[static_cast<std::size_t>(x.slot)];
  slot.kind = Slot::Kind::Node;
  slot.id = id;
  if (x.ann == Annotation::Approx || options_.force_all_at_sample ||
      (options_.force_bernoulli_at_sample && !x.gaussian)) {
    force(p, id, ctx, s.id);
  }
}

void Interpreter::exec_observe(Particle& p, const CStmt& s, const CObserve& x, ExecCtx& ctx) const {
  const Slot& slot = p.env[static_cast<std::size_t>(x.slot)];
  if (slot.kind != Slot::Kind::Node) throw std::logic_error("observe of a non-random slot");
  const NodeId id = slot.id;
  long long row = 0;
  double value = x.value;
  if (!x.literal) {
    row = eval_int(p, x.index);
    if (!options_.record_observations) value = datum(x.param, row);
  }
  if (options_.record_observations) {
    double v = force(p, id, ctx, s.id);
    if (!x.literal && ctx.recorder) {
      auto& col = ctx.recorder->columns[static_cast<std::size_t>(x.param)];
      if (row >= 1) {
        if (col.size() < static_cast<std::size_t>(row)) col.resize(static_cast<std::size_t>(row), 0.0);
        col[static_cast<std::size_t>(row - 1)] = v;
      }
    }
    return;
  }
  const bool shape = options_.draw == DrawMode::Shape;
  if (const auto* d = std::get_if<DeltaDist>(&p.state.node(id).dist)) {
    if (d->value != value && !shape) p.logw = kNegInf;
    return;
  }
  if (options_.engine == Engine::DS) chain_policy(p, id, ctx, s.id);
  while (auto blocked = p.state.hoist(id)) force(p, blocked->by, ctx, s.id);
  if (p.state.node(id).bernoulli_family && value != 0.0 && value != 1.0) {
    throw DataError("observation of Bernoulli '" + code_.slot_names[x.slot] + "' must be 0 or 1, got " +
                    format_g17(value));
  }
  if (!shape) p.logw += p.state.score(id, value);
  p.state.realize(id, value);
}

void Interpreter::exec_if(Particle& p, const CStmt& s, const CIf& x, ExecCtx& ctx) const {
  const Slot& cslot = p.env[static_cast<std::size_t>(x.cond)];
  double cond = 0.0;
  if (cslot.kind == Slot::Kind::Real) {
    cond = cslot.value;
  } else {
    const NodeId cid = cslot.id;
    if (const auto* d = std::get_if<DeltaDist>(&p.state.node(cid).dist)) {
      cond = d->value;
    } else {
      std::vector<NodeId> ids{cid};
      for (int r : x.pre_reads) {
        const Slot& rs = p.env[static_cast<std::size_t>(r)];
        if (rs.kind == Slot::Kind::Node && !p.state.node(rs.id).is_delta()) ids.push_back(rs.id);
      }
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      for (NodeId id : ids) force(p, id, ctx, s.id);
      cond = std::get<DeltaDist>(p.state.node(cid).dist).value;
    }
  }
  exec_block(p, cond != 0.0 ? x.then_body : x.else_body, ctx);
}

void Interpreter::enter_iteration(Particle& p, const CFor& loop, long long k) const {
  Slot& s = p.env[static_cast<std::size_t>(loop.index)];
  s.kind = Slot::Kind::Real;
  s.value = static_cast<double>(k);
}

void Interpreter::exec_for(Particle& p, const CFor& x, ExecCtx& ctx) const {
  const int outer = ctx.iteration;
  for (long long k = x.lo; k <= x.hi; ++k) {
    enter_iteration(p, x, k);
    ctx.iteration = static_cast<int>(k - x.lo + 1);
    exec_block(p, x.body, ctx);
    collect(p);
    if (p.logw == kNegInf) break;
  }
  ctx.iteration = outer;
}

void Interpreter::exec_stmt(Particle& p, const CStmt& s, ExecCtx& ctx) const {
  if (const auto* x = s.as<CSample>()) {
    exec_sample(p, s, *x, ctx);
  } else if (const auto* x = s.as<CObserve>()) {
    exec_observe(p, s, *x, ctx);
  } else if (const auto* x = s.as<CIf>()) {
    exec_if(p, s, *x, ctx);
  } else {
    exec_for(p, *s.as<CFor>(), ctx);
  }
}

void Interpreter::exec_block(Particle& p, const CBlock& block, ExecCtx& ctx) const {
  for (const CStmt& s : block) {
    if (p.logw == kNegInf) return;
    exec_stmt(p, s, ctx);
  }
}

void Interpreter::settle_result(Particle& p, ExecCtx& ctx) const {
  const Slot& s = p.env[static_cast<std::size_t>(code_.result_slot)];
  if (s.kind != Slot::Kind::Node) return;
  while (true) {
    Marginal m = p.state.marginal_of(s.id);
    const auto* need = std::get_if<NeedsApprox>(&m);
    if (!need) return;
    force(p, need->by, ctx, 0);
  }
}

PosteriorComponent Interpreter::summarize(const Particle& p) const {
  const Slot& s = p.env[static_cast<std::size_t>(code_.result_slot)];
  PosteriorComponent c;
  if (s.kind == Slot::Kind::Real) {
    c.kind = PosteriorComponent::Kind::Value;
    c.mean = s.value;
    return c;
  }
  if (s.kind == Slot::Kind::Unbound) throw std::logic_error("result variable is unbound");
  const Node& n = p.state.node(s.id);
  if (const auto* d = std::get_if<DeltaDist>(&n.dist)) {
    c.kind = PosteriorComponent::Kind::Value;
    c.mean = d->value;
    return c;
  }
  Marginal m = p.state.marginal_of(s.id);
  if (const auto* g = std::get_if<GaussianParams>(&m)) {
    c.mean = g->mean;
    c.variance = g->variance;
  } else if (const auto* b = std::get_if<BernoulliParam>(&m)) {
    c.kind = PosteriorComponent::Kind::Bernoulli;
    c.mean = b->prob;
  } else {
    throw std::logic_error("result marginal needs sampling");
  }
  return c;
}

}  // namespace hppl
