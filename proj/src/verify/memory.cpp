#include "hppl/verify/memory.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "hppl/runtime/compile.hpp"
#include "hppl/runtime/interpreter.hpp"
#include "hppl/symbolic/affine.hpp"

namespace hppl {

std::string_view to_string(MemoryVerdict::Kind k) {
  switch (k) {
    case MemoryVerdict::Kind::Bounded:
      return "Bounded";
    case MemoryVerdict::Kind::Unbounded:
      return "Unbounded";
    case MemoryVerdict::Kind::Unknown:
      return "Unknown";
  }
  return "?";
}

std::string describe(const MemoryVerdict& v) {
  switch (v.kind) {
    case MemoryVerdict::Kind::Bounded:
      return "Bounded(" + std::to_string(v.bound) + ", m=" + std::to_string(v.m) + ")";
    case MemoryVerdict::Kind::Unbounded:
      return "Unbounded(witness " + v.witness + ")";
    case MemoryVerdict::Kind::Unknown:
      return "Unknown";
  }
  return "?";
}

namespace {

class GiveUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rep {
  Particle p;
  // First node id of each explored iteration of the current loop.
  std::vector<NodeId> starts;
};

class Explorer {
 public:
  Explorer(const CheckedProgram& program, const MemConfig& cfg)
      : program_(program),
        cfg_(cfg),
        code_(compile(program)),
        interp_(code_, {},
                ExecOptions{.engine = Engine::SSI,
                            .enforce_exact = false,
                            .zero_data = true,
                            .draw = DrawMode::Shape}) {}

  MemoryVerdict run() {
    MemoryVerdict out;
    std::vector<Rep> states;
    states.push_back(Rep{interp_.make_particle(Stream(0)), {}});
    bool saw_loop = false;
    try {
      for (const CStmt& s : code_.body) {
        if (const auto* loop = s.as<CFor>()) {
          saw_loop = true;
          MemoryVerdict v = explore_loop(states, *loop);
          if (v.kind != MemoryVerdict::Kind::Bounded) return v;
          out.bound = std::max(out.bound, v.bound);
          out.m = std::max(out.m, v.m);
          if (out.explored.empty()) out.explored = std::move(v.explored);
        } else {
          states = step(states, 0, [&](Particle& p, ExecCtx& ctx) { interp_.exec_stmt(p, s, ctx); });
        }
      }
    } catch (const GiveUp& e) {
      out = MemoryVerdict{};
      out.detail = e.what();
      return out;
    } catch (const OracleError& e) {
      out = MemoryVerdict{};
      out.detail = e.what();
      return out;
    }
    if (!saw_loop) {
      for (const Rep& r : states) out.bound = std::max(out.bound, r.p.state.size());
    }
    out.kind = MemoryVerdict::Kind::Bounded;
    return out;
  }

 private:
  // Iteration (1-based) in which the node was made; 0 if before the loop.
  static int born(const Rep& r, NodeId id) {
    auto it = std::upper_bound(r.starts.begin(), r.starts.end(), id);
    return static_cast<int>(it - r.starts.begin());
  }

  std::string key(const Rep& r, int k) const {
    const SymbolicState& s = r.p.state;
    std::map<NodeId, int> canon;
    std::vector<NodeId> order;
    auto visit = [&](NodeId root) {
      std::vector<NodeId> stack{root};
      while (!stack.empty()) {
        NodeId id = stack.back();
        stack.pop_back();
        if (canon.count(id)) continue;
        canon[id] = static_cast<int>(order.size());
        order.push_back(id);
        std::vector<NodeId> ps = s.parents(id);
        for (auto it = ps.rbegin(); it != ps.rend(); ++it) stack.push_back(*it);
      }
    };
    std::string out;
    for (const Slot& slot : r.p.env) {
      switch (slot.kind) {
        case Slot::Kind::Unbound:
          out += "-,";
          break;
        case Slot::Kind::Real:
          out += "r,";
          break;
        case Slot::Kind::Node:
          visit(slot.id);
          out += "#" + std::to_string(canon.at(slot.id)) + ",";
          break;
      }
    }
    for (NodeId id : order) {
      const Node& n = s.node(id);
      out += '|';
      if (n.is_delta()) {
        out += 'D';
      } else if (const auto* b = std::get_if<BernoulliDist>(&n.dist)) {
        out += "B" + format_g17(b->prob);
      } else {
        out += 'G';
      }
      out += std::to_string(n.origin.stmt);
      const int b = born(r, id);
      out += b == 0 ? std::string("p") : "a" + std::to_string(k - b);
      std::vector<int> ps;
      for (NodeId p : s.parents(id)) ps.push_back(canon.at(p));
      std::sort(ps.begin(), ps.end());
      for (int p : ps) out += "<" + std::to_string(p);
    }
    return out;
  }

  // Runs `body` on every state under every feasible Bernoulli outcome and
  // returns one representative per distinct shape.
  template <typename F>
  std::vector<Rep> step(const std::vector<Rep>& in, int k, F&& body) {
    std::map<std::string, Rep> out;
    for (const Rep& rep : in) {
      std::vector<std::vector<int>> pending{{}};
      while (!pending.empty()) {
        std::vector<int> prefix = std::move(pending.back());
        pending.pop_back();
        Rep r = rep;
        Tape tape;
        tape.prefix = prefix;
        tape.limit = 24;
        ExecCtx ctx;
        ctx.tape = &tape;
        ctx.iteration = k;
        body(r.p, ctx);
        interp_.collect(r.p);
        for (std::size_t pos = prefix.size(); pos < tape.taken.size(); ++pos) {
          const int alt = 1 - tape.taken[pos];
          const double prob = tape.probs[pos];
          if (alt == 1 ? prob <= 0.0 : prob >= 1.0) continue;
          std::vector<int> next(tape.taken.begin(), tape.taken.begin() + static_cast<std::ptrdiff_t>(pos));
          next.push_back(alt);
          pending.push_back(std::move(next));
        }
        std::string kk = key(r, k);
        out.emplace(std::move(kk), std::move(r));
        if (out.size() > cfg_.max_states) {
          throw GiveUp("more than " + std::to_string(cfg_.max_states) + " distinct states");
        }
      }
    }
    std::vector<Rep> reps;
    reps.reserve(out.size());
    for (auto& [kk, r] : out) reps.push_back(std::move(r));
    return reps;
  }

  MemoryVerdict explore_loop(std::vector<Rep>& states, const CFor& loop) {
    MemoryVerdict v;
    v.kind = MemoryVerdict::Kind::Bounded;
    if (loop.hi < loop.lo) return v;
    for (Rep& r : states) r.starts.clear();
    std::set<std::string> previous;
    for (int k = 1; k <= cfg_.k_max; ++k) {
      for (Rep& r : states) r.starts.push_back(r.p.state.next_id());
      const long long index = loop.lo + k - 1;
      states = step(states, k, [&](Particle& p, ExecCtx& ctx) {
        interp_.enter_iteration(p, loop, index);
        interp_.exec_block(p, loop.body, ctx);
      });
      std::set<std::string> keys;
      std::size_t size = 0;
      for (const Rep& r : states) {
        keys.insert(key(r, k));
        size = std::max(size, r.p.state.size());
      }
      v.explored.push_back(size);
      if (keys == previous) return settle(states, k, std::move(v));
      previous = std::move(keys);
    }
    return give_up(states, cfg_.k_max, std::move(v));
  }

  MemoryVerdict settle(const std::vector<Rep>& states, int k, MemoryVerdict v) const {
    v.bound = *std::max_element(v.explored.begin(), v.explored.end());
    int oldest = -1;
    for (const Rep& r : states) {
      for (const Node& n : r.p.state.nodes()) {
        const int b = born(r, n.id);
        if (b > 0 && !n.is_delta()) oldest = std::max(oldest, k - b);
      }
    }
    v.m = oldest + 1;
    if (v.m > cfg_.m_max) {
      MemoryVerdict u;
      u.detail = "loop nodes outlive " + std::to_string(cfg_.m_max) + " iterations";
      u.explored = std::move(v.explored);
      return u;
    }
    return v;
  }

  MemoryVerdict give_up(const std::vector<Rep>& states, int k, MemoryVerdict v) const {
    MemoryVerdict out;
    out.explored = std::move(v.explored);
    const auto& e = out.explored;
    const std::size_t window = static_cast<std::size_t>(cfg_.m_max) + 1;
    bool growing = e.size() > window;
    for (std::size_t i = e.size() - std::min(e.size(), window); growing && i < e.size(); ++i) {
      growing = e[i] > e[i - 1];
    }
    const Node* witness = nullptr;
    int witness_age = cfg_.m_max;
    for (const Rep& r : states) {
      for (const Node& n : r.p.state.nodes()) {
        const int b = born(r, n.id);
        if (b > 0 && !n.is_delta() && k - b > witness_age) {
          witness_age = k - b;
          witness = &n;
        }
      }
    }
    if (growing && witness) {
      out.kind = MemoryVerdict::Kind::Unbounded;
      out.witness_stmt = witness->origin.stmt;
      out.witness = program_.sample(witness->origin.stmt)->target;
    } else {
      out.detail = "no fixpoint within " + std::to_string(cfg_.k_max) + " iterations";
    }
    return out;
  }

  const CheckedProgram& program_;
  const MemConfig& cfg_;
  Compiled code_;
  Interpreter interp_;
};

}  // namespace

MemoryVerdict analyze_memory(const CheckedProgram& program, const MemConfig& cfg) {
  if (cfg.m_max < 1) throw std::invalid_argument("m_max must be at least 1");
  if (cfg.k_max < 2) throw std::invalid_argument("k_max must be at least 2");
  return Explorer(program, cfg).run();
}

}  // namespace hppl
