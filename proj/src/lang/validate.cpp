#include "hppl/lang/validate.hpp"

#include <set>
#include <stdexcept>

#include "hppl/lang/parser.hpp"
#include "hppl/lang/render.hpp"

namespace hppl {

CheckedProgram::CheckedProgram(Program program, std::map<std::string, long long> constants,
                               std::vector<std::string> notes)
    : ast_(std::make_shared<const Program>(std::move(program))),
      constants_(std::move(constants)),
      notes_(std::move(notes)) {
  by_id_.push_back(nullptr);
  for_each_stmt(ast_->body, [&](const Stmt& s) {
    if (static_cast<std::size_t>(s.id) != by_id_.size()) {
      throw std::logic_error("statement ids must be dense and pre-ordered");
    }
    by_id_.push_back(&s);
  });
}

const SampleStmt* CheckedProgram::sample(StmtId id) const { return stmt(id).as<SampleStmt>(); }

std::vector<StmtId> CheckedProgram::annotated(Annotation ann) const {
  std::vector<StmtId> out;
  for (std::size_t i = 1; i < by_id_.size(); ++i) {
    if (const auto* s = by_id_[i]->as<SampleStmt>(); s && s->ann == ann) {
      out.push_back(static_cast<StmtId>(i));
    }
  }
  return out;
}

namespace {

constexpr unsigned kGaussian = 1;
constexpr unsigned kBernoulli = 2;

struct Scope {
  std::map<std::string, unsigned> sampled;
  std::set<std::string> observed;
};

Scope join(const Scope& a, const Scope& b) {
  Scope out;
  for (const auto& [name, fam] : a.sampled) {
    if (auto it = b.sampled.find(name); it != b.sampled.end()) out.sampled[name] = fam | it->second;
  }
  out.observed = a.observed;
  out.observed.insert(b.observed.begin(), b.observed.end());
  return out;
}

void assign_ids(Block& b, StmtId& next) {
  for (Stmt& s : b) {
    s.id = next++;
    if (auto* i = s.as<IfStmt>()) {
      assign_ids(i->then_body, next);
      assign_ids(i->else_body, next);
    } else if (auto* l = s.as<ForStmt>()) {
      assign_ids(l->body, next);
    }
  }
}

class Validator {
 public:
  Validator(Program& p, std::map<std::string, long long> consts) : p_(p), consts_(std::move(consts)) {}

  void run() {
    std::set<std::string> seen;
    for (const auto& name : p_.params) {
      if (!seen.insert(name).second) error(0, {}, "duplicate name", "parameter '" + name + "' declared twice");
    }
    std::set<std::string> seen_const;
    for (const auto& c : p_.consts) {
      if (!seen_const.insert(c.name).second) {
        error(0, c.loc, "duplicate name", "constant '" + c.name + "' declared twice");
      }
      if (seen.count(c.name)) error(0, c.loc, "duplicate name", "'" + c.name + "' is both a parameter and a constant");
    }
    Scope scope;
    block(p_.body, scope);
    if (!scope.sampled.count(p_.result)) {
      error(0, p_.result_loc, "result not in scope", "result '" + p_.result + "' is not a variable bound on every path");
    }
  }

  std::vector<ValidationError> errors;
  std::vector<std::string> notes;

 private:
  void error(StmtId id, SourceLoc loc, std::string rule, std::string msg) {
    ValidationError e{id, loc, std::move(rule), std::move(msg)};
    for (const auto& old : errors)
      if (old == e) return;
    errors.push_back(std::move(e));
  }

  bool is_param(const std::string& n) const {
    for (const auto& q : p_.params)
      if (q == n) return true;
    return false;
  }
  bool is_const(const std::string& n) const { return consts_.count(n) > 0; }
  bool is_index(const std::string& n) const {
    for (const auto& q : indices_)
      if (q == n) return true;
    return false;
  }

  std::optional<long long> const_int(const IntExpr& e, const Stmt& s, bool allow_index, const char* what) {
    if (!e.is_name) return e.value;
    if (is_const(e.name)) return consts_.at(e.name);
    if (allow_index && is_index(e.name)) return std::nullopt;
    if (is_index(e.name)) {
      error(s.id, s.loc, "non-constant bound", std::string(what) + " '" + e.name + "' must be a constant");
    } else {
      error(s.id, s.loc, "unbound identifier", "unbound identifier '" + e.name + "'");
    }
    return std::nullopt;
  }

  void data_ref(const std::string& param, const IntExpr& index, const Stmt& s) {
    if (!is_param(param)) {
      error(s.id, s.loc, "unknown parameter", "'" + param + "' is not a parameter of " + p_.name);
    }
    auto v = const_int(index, s, true, "index");
    if (v && *v < 1) error(s.id, s.loc, "index out of range", "data indices start at 1");
  }

  // Returns true if the expression depends on a random variable.
  bool expr(NumExpr& e, const Scope& scope, const Stmt& s, bool& affine) {
    switch (e.kind) {
      case NumExpr::Kind::Literal:
        return false;
      case NumExpr::Kind::Datum:
        data_ref(e.name, e.index, s);
        return false;
      case NumExpr::Kind::Var:
        if (is_index(e.name) || is_const(e.name)) return false;
        if (is_param(e.name)) {
          error(s.id, s.loc, "parameter without index", "parameter '" + e.name + "' must be indexed");
          return false;
        }
        if (!scope.sampled.count(e.name)) {
          error(s.id, s.loc, "unbound identifier", "unbound identifier '" + e.name + "'");
          return false;
        }
        return true;
      default:
        break;
    }
    bool l = expr(e.args[0], scope, s, affine);
    bool r = expr(e.args[1], scope, s, affine);
    e.affine = !(e.kind == NumExpr::Kind::Mul && l && r);
    if (!e.affine) affine = false;
    return l || r;
  }

  std::optional<double> fold(const NumExpr& e) const {
    switch (e.kind) {
      case NumExpr::Kind::Literal:
        return e.value;
      case NumExpr::Kind::Var:
        if (!is_index(e.name) && is_const(e.name)) return static_cast<double>(consts_.at(e.name));
        return std::nullopt;
      case NumExpr::Kind::Datum:
        return std::nullopt;
      default:
        break;
    }
    auto l = fold(e.lhs());
    auto r = fold(e.rhs());
    if (!l || !r) return std::nullopt;
    if (e.kind == NumExpr::Kind::Add) return *l + *r;
    if (e.kind == NumExpr::Kind::Sub) return *l - *r;
    return *l * *r;
  }

  void check_target(const std::string& name, const Stmt& s) {
    if (is_param(name) || is_const(name) || is_index(name)) {
      error(s.id, s.loc, "invalid target", "cannot sample into '" + name + "'");
    }
  }

  void block(Block& b, Scope& scope) {
    for (Stmt& s : b) stmt(s, scope);
  }

  void stmt(Stmt& s, Scope& scope) {
    if (auto* smp = s.as<SampleStmt>()) {
      check_target(smp->target, s);
      unsigned fam = 0;
      if (auto* g = std::get_if<GaussianExpr>(&smp->dist)) {
        fam = kGaussian;
        bool mean_affine = true;
        expr(g->mean, scope, s, mean_affine);
        if (!mean_affine) {
          notes.push_back("statement " + std::to_string(s.id) + " (line " + std::to_string(s.loc.line) +
                          "): non-affine mean in '" + smp->target + "'; the runtime will sample");
        }
        bool var_affine = true;
        bool random_var = expr(g->variance, scope, s, var_affine);
        if (!var_affine) {
          error(s.id, s.loc, "non-affine variance", "variance of '" + smp->target + "' must be affine");
        }
        if (!random_var) {
          if (auto v = fold(g->variance); v && !(*v > 0.0)) {
            error(s.id, s.loc, "non-positive variance", "variance of '" + smp->target + "' must be positive");
          }
        }
      } else {
        auto& bern = std::get<BernoulliExpr>(smp->dist);
        fam = kBernoulli;
        bool affine = true;
        expr(bern.prob, scope, s, affine);
        auto v = fold(bern.prob);
        if (!v) {
          error(s.id, s.loc, "non-constant probability",
                "bernoulli probability of '" + smp->target + "' must fold to a constant");
        } else if (!(*v >= 0.0 && *v <= 1.0)) {
          error(s.id, s.loc, "probability out of range",
                "bernoulli probability of '" + smp->target + "' must lie in [0, 1]");
        }
      }
      if (!is_param(smp->target) && !is_const(smp->target) && !is_index(smp->target)) {
        scope.sampled[smp->target] = fam;
        scope.observed.erase(smp->target);
      }
      return;
    }
    if (auto* obs = s.as<ObserveStmt>()) {
      auto it = scope.sampled.find(obs->subject);
      if (it == scope.sampled.end()) {
        if (is_param(obs->subject) || is_const(obs->subject) || is_index(obs->subject)) {
          error(s.id, s.loc, "observe non-random", "observe subject '" + obs->subject + "' is not a sampled variable");
        } else {
          error(s.id, s.loc, "unbound identifier", "unbound identifier '" + obs->subject + "'");
        }
      } else {
        if (scope.observed.count(obs->subject)) {
          error(s.id, s.loc, "observed twice", "'" + obs->subject + "' may already be observed on this path");
        }
        if (it->second == kBernoulli) {
          if (const double* lit = std::get_if<double>(&obs->datum); lit && *lit != 0.0 && *lit != 1.0) {
            error(s.id, s.loc, "bernoulli datum", "observation of bernoulli '" + obs->subject + "' must be 0 or 1");
          }
        }
        scope.observed.insert(obs->subject);
      }
      if (const auto* ref = std::get_if<DataRef>(&obs->datum)) data_ref(ref->param, ref->index, s);
      return;
    }
    if (auto* i = s.as<IfStmt>()) {
      auto it = scope.sampled.find(i->cond);
      if (it == scope.sampled.end()) {
        error(s.id, s.loc, "unbound identifier", "condition '" + i->cond + "' is not a variable bound on every path");
      } else if (it->second != kBernoulli) {
        error(s.id, s.loc, "non-bernoulli condition", "condition '" + i->cond + "' must be a bernoulli variable");
      }
      Scope then_scope = scope;
      Scope else_scope = scope;
      block(i->then_body, then_scope);
      block(i->else_body, else_scope);
      scope = join(then_scope, else_scope);
      return;
    }
    auto& l = std::get<ForStmt>(s.node);
    if (is_param(l.index) || is_const(l.index) || is_index(l.index) || scope.sampled.count(l.index)) {
      error(s.id, s.loc, "index shadows", "loop index '" + l.index + "' shadows another name");
    }
    auto lo = const_int(l.lo, s, false, "loop bound");
    auto hi = const_int(l.hi, s, false, "loop bound");
    long long trips = (lo && hi) ? std::max(0LL, *hi - *lo + 1) : 1;
    indices_.push_back(l.index);
    if (trips > 0) {
      Scope once = scope;
      block(l.body, once);
      if (trips > 1) {
        // A second pass catches observations repeated across iterations.
        Scope twice = once;
        block(l.body, twice);
        scope = join(once, twice);
      } else {
        scope = once;
      }
    }
    indices_.pop_back();
  }

  Program& p_;
  std::map<std::string, long long> consts_;
  std::vector<std::string> indices_;
};

}  // namespace

ValidationResult validate(const Program& p, const ConstOverrides& overrides) {
  Program copy = p;
  StmtId next = 1;
  assign_ids(copy.body, next);

  std::map<std::string, long long> consts;
  for (const auto& c : copy.consts) consts.emplace(c.name, c.value);
  for (const auto& [k, v] : overrides) consts[k] = v;

  Validator v(copy, consts);
  v.run();

  ValidationResult out;
  out.errors = std::move(v.errors);
  if (out.errors.empty()) out.checked.emplace(std::move(copy), std::move(consts), std::move(v.notes));
  return out;
}

CheckedProgram load_checked(std::string_view text, const ConstOverrides& overrides) {
  ValidationResult r = validate(parse(text), overrides);
  if (!r.ok()) {
    const auto& e = r.errors.front();
    throw std::invalid_argument(std::to_string(e.loc.line) + ":" + std::to_string(e.loc.column) + ": " + e.rule +
                                ": " + e.message);
  }
  return std::move(*r.checked);
}

}  // namespace hppl
