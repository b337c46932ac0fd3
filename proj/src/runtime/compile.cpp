#include "hppl/runtime/compile.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace hppl {

namespace {

class Compiler {
 public:
  explicit Compiler(const CheckedProgram& p) : p_(p) {
    for (std::size_t k = 0; k < p.program().params.size(); ++k) params_[p.program().params[k]] = static_cast<int>(k);
  }

  Compiled run() {
    Compiled out;
    out.program = &p_;
    out.body = block(p_.body());
    out.result_slot = slot(p_.program().result);
    out.slot_names = names_;
    return out;
  }

 private:
  int slot(const std::string& name) {
    auto it = slots_.find(name);
    if (it != slots_.end()) return it->second;
    int s = static_cast<int>(names_.size());
    names_.push_back(name);
    slots_[name] = s;
    return s;
  }

  CInt int_expr(const IntExpr& e) {
    CInt out;
    if (!e.is_name) {
      out.value = e.value;
    } else if (auto c = p_.constants().find(e.name); c != p_.constants().end()) {
      out.value = c->second;
    } else {
      out.is_slot = true;
      out.slot = slot(e.name);
    }
    return out;
  }

  long long constant(const IntExpr& e) {
    CInt c = int_expr(e);
    if (c.is_slot) throw std::logic_error("loop bound '" + e.name + "' is not constant");
    return c.value;
  }

  CExpr expr(const NumExpr& e) {
    CExpr out;
    out.kind = e.kind;
    switch (e.kind) {
      case NumExpr::Kind::Literal:
        out.value = e.value;
        break;
      case NumExpr::Kind::Var:
        if (auto c = p_.constants().find(e.name); c != p_.constants().end()) {
          out.kind = NumExpr::Kind::Literal;
          out.value = static_cast<double>(c->second);
        } else {
          out.slot = slot(e.name);
        }
        break;
      case NumExpr::Kind::Datum:
        out.param = params_.at(e.name);
        out.index = int_expr(e.index);
        break;
      default: {
        CExpr l = expr(e.lhs());
        CExpr r = expr(e.rhs());
        if (l.kind == NumExpr::Kind::Literal && r.kind == NumExpr::Kind::Literal) {
          double v = e.kind == NumExpr::Kind::Add ? l.value + r.value
                     : e.kind == NumExpr::Kind::Sub ? l.value - r.value
                                                    : l.value * r.value;
          out.kind = NumExpr::Kind::Literal;
          out.value = v;
        } else {
          out.args.push_back(std::move(l));
          out.args.push_back(std::move(r));
        }
      }
    }
    return out;
  }

  static bool observes(const CBlock& b) {
    return std::any_of(b.begin(), b.end(), [](const CStmt& s) { return s.has_observe; });
  }

  CBlock block(const Block& b) {
    CBlock out;
    for (const Stmt& s : b) out.push_back(stmt(s));
    return out;
  }

  CStmt stmt(const Stmt& s) {
    CStmt out;
    out.id = s.id;
    out.line = s.loc.line;
    if (const auto* x = s.as<SampleStmt>()) {
      CSample c;
      c.ann = x->ann;
      if (const auto* g = std::get_if<GaussianExpr>(&x->dist)) {
        c.mean = expr(g->mean);
        c.variance = expr(g->variance);
      } else {
        c.gaussian = false;
        CExpr prob = expr(std::get<BernoulliExpr>(x->dist).prob);
        if (prob.kind != NumExpr::Kind::Literal) throw std::logic_error("bernoulli probability is not constant");
        c.prob = prob.value;
      }
      c.slot = slot(x->target);
      out.node = std::move(c);
    } else if (const auto* x = s.as<ObserveStmt>()) {
      CObserve c;
      c.slot = slot(x->subject);
      if (const auto* d = std::get_if<DataRef>(&x->datum)) {
        c.param = params_.at(d->param);
        c.index = int_expr(d->index);
      } else {
        c.literal = true;
        c.value = std::get<double>(x->datum);
      }
      out.node = std::move(c);
      out.has_observe = true;
    } else if (const auto* x = s.as<IfStmt>()) {
      CIf c;
      c.cond = slot(x->cond);
      c.then_body = block(x->then_body);
      c.else_body = block(x->else_body);
      std::set<std::string> reads;
      std::set<std::string> defined;
      branch_reads(x->then_body, defined, reads);
      defined.clear();
      branch_reads(x->else_body, defined, reads);
      for (const auto& n : reads) c.pre_reads.push_back(slot(n));
      std::sort(c.pre_reads.begin(), c.pre_reads.end());
      out.has_observe = observes(c.then_body) || observes(c.else_body);
      out.node = std::move(c);
    } else {
      const auto& f = *s.as<ForStmt>();
      CFor c;
      c.index = slot(f.index);
      c.lo = constant(f.lo);
      c.hi = constant(f.hi);
      c.body = block(f.body);
      out.has_observe = observes(c.body);
      out.node = std::move(c);
    }
    return out;
  }

  void expr_reads(const NumExpr& e, const std::set<std::string>& defined, std::set<std::string>& reads) {
    std::vector<std::string> vars;
    collect_vars(e, vars);
    for (auto& v : vars) {
      if (!defined.count(v) && !p_.constants().count(v)) reads.insert(v);
    }
  }

  void branch_reads(const Block& b, std::set<std::string> defined, std::set<std::string>& reads) {
    for (const Stmt& s : b) {
      if (const auto* x = s.as<SampleStmt>()) {
        if (const auto* g = std::get_if<GaussianExpr>(&x->dist)) {
          expr_reads(g->mean, defined, reads);
          expr_reads(g->variance, defined, reads);
        }
        defined.insert(x->target);
      } else if (const auto* x = s.as<IfStmt>()) {
        branch_reads(x->then_body, defined, reads);
        branch_reads(x->else_body, defined, reads);
      } else if (const auto* x = s.as<ForStmt>()) {
        auto inner = defined;
        inner.insert(x->index);
        branch_reads(x->body, inner, reads);
      }
    }
  }

  const CheckedProgram& p_;
  std::map<std::string, int> params_;
  std::map<std::string, int> slots_;
  std::vector<std::string> names_;
};

}  // namespace

Compiled compile(const CheckedProgram& program) { return Compiler(program).run(); }

}  // namespace hppl
