#include "hppl/symbolic/state.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>

namespace hppl {

namespace {

std::string id_str(NodeId id) { return "n" + std::to_string(id.value); }

[[noreturn]] void fail(SymbolicError::Kind kind, const std::string& msg) { throw SymbolicError(kind, msg); }

}  // namespace

bool Node::is_root() const {
  if (const auto* g = std::get_if<GaussianDist>(&dist)) return g->mean.is_constant();
  return true;
}

const Node* SymbolicState::find(NodeId id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id, [](const Node& n, NodeId k) { return n.id < k; });
  if (it == nodes_.end() || it->id != id) return nullptr;
  return &*it;
}

const Node& SymbolicState::node(NodeId id) const {
  const Node* n = find(id);
  if (!n) fail(SymbolicError::Kind::UnknownNode, "unknown node " + id_str(id));
  return *n;
}

Node& SymbolicState::node_mut(NodeId id) { return const_cast<Node&>(node(id)); }

NodeId SymbolicState::assume(SymDist dist, Annotation ann, Origin origin) {
  bool bern = false;
  if (auto* g = std::get_if<GaussianDist>(&dist)) {
    if (!(g->variance > kVarianceFloor) || !std::isfinite(g->variance)) {
      fail(SymbolicError::Kind::DegenerateVariance, "variance " + format_g17(g->variance) + " is not positive");
    }
    AffineExpr folded(g->mean.intercept());
    for (const auto& t : g->mean.terms()) {
      const Node* p = find(t.node);
      if (!p) fail(SymbolicError::Kind::UnknownParent, "mean references unknown node " + id_str(t.node));
      if (const auto* d = std::get_if<DeltaDist>(&p->dist)) {
        folded.set_intercept(folded.intercept() + t.coef * d->value);
      } else {
        folded.add_term(t.node, t.coef);
      }
    }
    g->mean = std::move(folded);
  } else if (const auto* b = std::get_if<BernoulliDist>(&dist)) {
    if (!(b->prob >= 0.0 && b->prob <= 1.0)) {
      fail(SymbolicError::Kind::DomainError, "probability " + format_g17(b->prob) + " outside [0, 1]");
    }
    bern = true;
  }
  NodeId id{next_++};
  nodes_.push_back(Node{id, std::move(dist), ann, origin, bern});
  return id;
}

std::vector<NodeId> SymbolicState::parents(NodeId id) const {
  std::vector<NodeId> out;
  if (const auto* g = std::get_if<GaussianDist>(&node(id).dist)) {
    for (const auto& t : g->mean.terms()) out.push_back(t.node);
  }
  return out;
}

namespace {

// Position lookup for one pass over an unchanged node list. Uses a dense
// table when ids are compact and binary search otherwise.
class Positions {
 public:
  explicit Positions(const std::vector<Node>& nodes) : nodes_(nodes) {
    if (nodes.empty()) return;
    base_ = nodes.front().id.value;
    const std::size_t range = nodes.back().id.value - base_ + 1;
    if (nodes.size() < 32 || range > 4 * nodes.size() + 64) return;
    dense_.assign(range, 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) dense_[nodes[i].id.value - base_] = static_cast<std::uint32_t>(i);
  }

  std::size_t operator()(NodeId id) const {
    if (!dense_.empty()) return dense_[id.value - base_];
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id, [](const Node& n, NodeId k) { return n.id < k; });
    return static_cast<std::size_t>(it - nodes_.begin());
  }

 private:
  const std::vector<Node>& nodes_;
  std::uint32_t base_ = 0;
  std::vector<std::uint32_t> dense_;
};

}  // namespace

std::size_t SymbolicState::index_of(NodeId id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id, [](const Node& n, NodeId k) { return n.id < k; });
  if (it == nodes_.end() || it->id != id) fail(SymbolicError::Kind::UnknownNode, "unknown node " + id_str(id));
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::vector<NodeId> SymbolicState::ancestors(NodeId id) const {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<std::size_t> stack{index_of(id)};
  std::vector<NodeId> out;
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    if (const auto* g = std::get_if<GaussianDist>(&nodes_[i].dist)) {
      for (const auto& t : g->mean.terms()) {
        std::size_t j = index_of(t.node);
        if (seen[j]) continue;
        seen[j] = 1;
        out.push_back(t.node);
        stack.push_back(j);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool SymbolicState::has_bernoulli_ancestor(NodeId id) const {
  boost::container::small_vector<std::size_t, 8> stack{index_of(id)};
  boost::container::small_vector<std::size_t, 8> seen;
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    const Node& n = nodes_[i];
    if (n.is_bernoulli() && n.id != id) return true;
    if (const auto* g = std::get_if<GaussianDist>(&n.dist)) {
      for (const auto& t : g->mean.terms()) {
        std::size_t j = index_of(t.node);
        if (std::find(seen.begin(), seen.end(), j) != seen.end()) continue;
        seen.push_back(j);
        stack.push_back(j);
      }
    }
  }
  return false;
}

std::vector<NodeId> SymbolicState::topological_order() const {
  const std::size_t n = nodes_.size();
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::size_t> indegree(n, 0);
  // Heap of positions; positions follow id order since nodes_ is sorted.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (const auto* g = std::get_if<GaussianDist>(&nodes_[i].dist)) {
      for (const auto& t : g->mean.terms()) {
        children[index_of(t.node)].push_back(i);
        ++indegree[i];
      }
    }
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t i = ready.top();
    ready.pop();
    order.push_back(nodes_[i].id);
    for (std::size_t c : children[i]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  return order;
}

std::vector<NodeId> SymbolicState::descendants_of_set(const std::vector<NodeId>& from) const {
  std::vector<char> reached(nodes_.size(), 0);
  for (NodeId f : from) reached[index_of(f)] = 1;
  std::vector<NodeId> out;
  for (NodeId id : topological_order()) {
    std::size_t i = index_of(id);
    if (!reached[i]) {
      if (const auto* g = std::get_if<GaussianDist>(&nodes_[i].dist)) {
        for (const auto& t : g->mean.terms()) {
          if (reached[index_of(t.node)]) {
            reached[i] = 1;
            break;
          }
        }
      }
    }
    if (reached[i]) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void SymbolicState::exchange(NodeId child, NodeId parent) {
  Node& c = node_mut(child);
  Node& p = node_mut(parent);
  auto& cg = std::get<GaussianDist>(c.dist);
  auto& pg = std::get<GaussianDist>(p.dist);

  AffineExpr r = cg.mean;
  const double a = r.remove(parent);
  const double v = cg.variance;
  const AffineExpr& m = pg.mean;
  const double s = pg.variance;

  const double var_t = a * a * s + v;
  if (!(var_t > kVarianceFloor)) {
    fail(SymbolicError::Kind::DegenerateVariance, "exchange of " + id_str(child) + " and " + id_str(parent) +
                                                      " gives variance " + format_g17(var_t));
  }
  const double k = a * s / var_t;
  const double var_p = s * v / var_t;
  if (!(var_p > kVarianceFloor)) {
    fail(SymbolicError::Kind::DegenerateVariance, "exchange of " + id_str(child) + " and " + id_str(parent) +
                                                      " gives variance " + format_g17(var_p));
  }

  AffineExpr mean_t = r;
  mean_t.add_scaled(m, a);

  AffineExpr mean_p = m * (v / var_t);
  mean_p.add_term(child, k);
  mean_p.add_scaled(r, -k);

  cg.mean = std::move(mean_t);
  cg.variance = var_t;
  pg.mean = std::move(mean_p);
  pg.variance = var_p;
}

void SymbolicState::swap(NodeId child, NodeId parent) {
  const Node& c = node(child);
  const Node& p = node(parent);
  const auto* cg = std::get_if<GaussianDist>(&c.dist);
  if (!cg || !p.is_gaussian()) {
    fail(SymbolicError::Kind::NotConjugate, "swap of " + id_str(child) + " and " + id_str(parent) +
                                                " requires two Gaussian nodes");
  }
  if (!cg->mean.references(parent)) {
    fail(SymbolicError::Kind::NotConjugate, id_str(child) + " does not depend on " + id_str(parent));
  }
  std::vector<NodeId> below = descendants_of_set({parent});
  for (const auto& t : cg->mean.terms()) {
    if (t.node == parent) continue;
    if (std::binary_search(below.begin(), below.end(), t.node)) {
      fail(SymbolicError::Kind::NotConjugate, "parent " + id_str(t.node) + " of " + id_str(child) +
                                                  " depends on " + id_str(parent));
    }
  }
  exchange(child, parent);
}

std::optional<Blocked> SymbolicState::hoist(NodeId target) {
  const Node& t = node(target);
  if (t.is_root()) return std::nullopt;
  if (has_bernoulli_ancestor(target)) {
    std::vector<NodeId> anc = ancestors(target);
    for (NodeId n : topological_order()) {
      if (node(n).is_bernoulli() && std::binary_search(anc.begin(), anc.end(), n)) return Blocked{n};
    }
  }
  const auto& terms = std::get<GaussianDist>(t.dist).mean.terms();
  if (std::all_of(terms.begin(), terms.end(), [&](const auto& term) { return node(term.node).is_root(); })) {
    while (!std::get<GaussianDist>(node(target).dist).mean.is_constant()) {
      exchange(target, std::get<GaussianDist>(node(target).dist).mean.terms().back().node);
    }
    return std::nullopt;
  }
  Order order = order_positions();
  hoist_gaussian(index_of(target), order);
  return std::nullopt;
}

SymbolicState::Order SymbolicState::order_positions() const {
  Order o;
  o.pos.resize(nodes_.size());
  for (NodeId id : topological_order()) {
    const std::size_t i = index_of(id);
    o.pos[i] = o.seq.size();
    o.seq.push_back(i);
  }
  return o;
}

std::size_t SymbolicState::last_parent(std::size_t target, const Order& order) const {
  std::size_t best = 0;
  std::size_t best_pos = 0;
  bool found = false;
  for (const auto& t : std::get<GaussianDist>(nodes_[target].dist).mean.terms()) {
    const std::size_t j = index_of(t.node);
    if (!found || order.pos[j] > best_pos) {
      best = j;
      best_pos = order.pos[j];
      found = true;
    }
  }
  return best;
}

std::vector<char> SymbolicState::ancestor_mask(std::size_t i) const {
  std::vector<char> mask(nodes_.size(), 0);
  std::vector<std::size_t> stack{i};
  const Positions at(nodes_);
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    if (const auto* g = std::get_if<GaussianDist>(&nodes_[k].dist)) {
      for (const auto& t : g->mean.terms()) {
        const std::size_t j = at(t.node);
        if (mask[j]) continue;
        mask[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return mask;
}

// True if `t` or one of its ancestors is marked.
bool SymbolicState::shares_ancestry(std::size_t t, const std::vector<char>& mask) const {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<std::size_t> stack{t};
  seen[t] = 1;
  const Positions at(nodes_);
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    if (mask[k]) return true;
    if (const auto* g = std::get_if<GaussianDist>(&nodes_[k].dist)) {
      for (const auto& term : g->mean.terms()) {
        const std::size_t j = at(term.node);
        if (seen[j]) continue;
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return false;
}

void SymbolicState::hoist_gaussian(std::size_t target, Order& order) {
  while (true) {
    const auto& mean = std::get<GaussianDist>(nodes_[target].dist).mean;
    if (mean.is_constant()) return;
    const std::size_t p = last_parent(target, order);
    if (!nodes_[p].is_root()) {
      bool clash = false;
      if (mean.terms().size() > 1) {
        const std::vector<char> mask = ancestor_mask(p);
        for (const auto& t : mean.terms()) {
          const std::size_t j = index_of(t.node);
          clash = clash || (j != p && mask[j]);
        }
        for (const auto& t : mean.terms()) {
          if (clash) break;
          const std::size_t j = index_of(t.node);
          clash = j != p && shares_ancestry(j, mask);
        }
      }
      if (!clash) hoist_gaussian(p, order);
    }
    bool local = order.pos[target] > order.pos[p];
    for (const auto& t : std::get<GaussianDist>(nodes_[target].dist).mean.terms()) {
      const std::size_t j = index_of(t.node);
      local = local && (j == p || order.pos[j] < order.pos[p]);
    }
    exchange(nodes_[target].id, nodes_[p].id);
    if (local) {
      const auto first = order.seq.begin() + static_cast<std::ptrdiff_t>(order.pos[p]);
      const auto last = order.seq.begin() + static_cast<std::ptrdiff_t>(order.pos[target]);
      std::rotate(first, last, last + 1);
      for (auto it = first; it != last + 1; ++it) order.pos[*it] = static_cast<std::size_t>(it - order.seq.begin());
    } else {
      order = order_positions();
    }
  }
}

void SymbolicState::realize(NodeId target, double value) {
  Node& t = node_mut(target);
  if (t.is_delta()) fail(SymbolicError::Kind::AlreadyRealized, id_str(target) + " is already realized");
  if (!t.is_root()) fail(SymbolicError::Kind::NotRoot, id_str(target) + " is not a root");
  if (t.is_bernoulli() && value != 0.0 && value != 1.0) {
    fail(SymbolicError::Kind::DomainError, "Bernoulli value " + format_g17(value) + " is not 0 or 1");
  }
  if (!std::isfinite(value)) fail(SymbolicError::Kind::DomainError, "value is not finite");
  t.dist = DeltaDist{value};
  for (Node& n : nodes_) {
    if (auto* g = std::get_if<GaussianDist>(&n.dist)) g->mean.substitute(target, value);
  }
}

double SymbolicState::score(NodeId target, double value) const {
  const Node& t = node(target);
  if (const auto* d = std::get_if<DeltaDist>(&t.dist)) {
    return d->value == value ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  if (!t.is_root()) fail(SymbolicError::Kind::NotRoot, id_str(target) + " is not a root");
  if (const auto* g = std::get_if<GaussianDist>(&t.dist)) {
    const double z = value - g->mean.intercept();
    return -0.5 * std::log(2.0 * std::numbers::pi * g->variance) - z * z / (2.0 * g->variance);
  }
  const double p = std::get<BernoulliDist>(t.dist).prob;
  if (value == 1.0) return std::log(p);
  if (value == 0.0) return std::log1p(-p);
  fail(SymbolicError::Kind::DomainError, "Bernoulli value " + format_g17(value) + " is not 0 or 1");
}

double SymbolicState::sample_root(NodeId target, Stream& rng) const {
  const Node& t = node(target);
  if (const auto* d = std::get_if<DeltaDist>(&t.dist)) return d->value;
  if (!t.is_root()) fail(SymbolicError::Kind::NotRoot, id_str(target) + " is not a root");
  if (const auto* g = std::get_if<GaussianDist>(&t.dist)) {
    std::normal_distribution<double> dist(g->mean.intercept(), std::sqrt(g->variance));
    return dist(rng);
  }
  return rng.uniform01() < std::get<BernoulliDist>(t.dist).prob ? 1.0 : 0.0;
}

Marginal SymbolicState::marginal_of(NodeId target) const {
  const Node& t = node(target);
  if (const auto* d = std::get_if<DeltaDist>(&t.dist)) return GaussianParams{d->value, 0.0};
  if (const auto* b = std::get_if<BernoulliDist>(&t.dist)) return BernoulliParam{b->prob};
  if (t.is_root()) {
    const auto& g = std::get<GaussianDist>(t.dist);
    return GaussianParams{g.mean.intercept(), g.variance};
  }
  SymbolicState copy = *this;
  if (auto blocked = copy.hoist(target)) return NeedsApprox{blocked->by};
  const auto& g = std::get<GaussianDist>(copy.node(target).dist);
  return GaussianParams{g.mean.intercept(), g.variance};
}

SymbolicState::Mask SymbolicState::reachable(std::span<const NodeId> roots) const {
  Mask keep(nodes_.size(), 0);
  boost::container::small_vector<std::size_t, 32> stack;
  const Positions at(nodes_);
  for (NodeId r : roots) {
    if (const Node* n = find(r)) stack.push_back(static_cast<std::size_t>(n - nodes_.data()));
  }
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    if (keep[i]) continue;
    keep[i] = 1;
    if (const auto* g = std::get_if<GaussianDist>(&nodes_[i].dist)) {
      for (const auto& t : g->mean.terms()) stack.push_back(at(t.node));
    }
  }
  return keep;
}

std::size_t SymbolicState::live_count(std::span<const NodeId> roots) const {
  const Mask keep = reachable(roots);
  std::size_t count = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (keep[i] && !nodes_[i].is_delta()) ++count;
  }
  return count;
}

void SymbolicState::drop_unreachable(std::span<const NodeId> roots) {
  const Mask keep = reachable(roots);
  std::size_t out = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!keep[i]) continue;
    if (out != i) nodes_[out] = std::move(nodes_[i]);
    ++out;
  }
  nodes_.resize(out);
}

void SymbolicState::collect(std::span<const NodeId> roots) {
  drop_unreachable(roots);
  for (;;) {
    const std::size_t n = nodes_.size();
    boost::container::small_vector<char, 32> named(n, 0);
    for (NodeId r : roots) {
      if (const Node* p = find(r)) named[static_cast<std::size_t>(p - nodes_.data())] = 1;
    }
    boost::container::small_vector<int, 32> children(n, 0);
    boost::container::small_vector<std::size_t, 32> child(n, 0);
    const Positions at(nodes_);
    for (std::size_t i = 0; i < n; ++i) {
      if (const auto* g = std::get_if<GaussianDist>(&nodes_[i].dist)) {
        for (const auto& t : g->mean.terms()) {
          const std::size_t j = at(t.node);
          ++children[j];
          child[j] = i;
        }
      }
    }
    std::size_t victim = n;
    for (std::size_t i = 0; i < n && victim == n; ++i) {
      if (!named[i] && children[i] == 1 && nodes_[i].is_gaussian() && nodes_[i].is_root()) victim = i;
    }
    if (victim == n) return;
    swap(nodes_[child[victim]].id, nodes_[victim].id);
    drop_unreachable(roots);
  }
}

std::string SymbolicState::check_invariants() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (i > 0 && !(nodes_[i - 1].id < n.id)) return "nodes not sorted at " + id_str(n.id);
    if (n.id.value >= next_) return id_str(n.id) + " is beyond the id counter";
    if (const auto* g = std::get_if<GaussianDist>(&n.dist)) {
      if (!(g->variance > kVarianceFloor) || !std::isfinite(g->variance)) {
        return id_str(n.id) + " has variance " + format_g17(g->variance);
      }
      if (!std::isfinite(g->mean.intercept())) return id_str(n.id) + " has a non-finite mean";
      const auto& terms = g->mean.terms();
      for (std::size_t k = 0; k < terms.size(); ++k) {
        if (k > 0 && !(terms[k - 1].node < terms[k].node)) return id_str(n.id) + " has unsorted terms";
        if (terms[k].coef == 0.0 || !std::isfinite(terms[k].coef)) {
          return id_str(n.id) + " has a bad coefficient on " + id_str(terms[k].node);
        }
        const Node* p = find(terms[k].node);
        if (!p) return id_str(n.id) + " references missing " + id_str(terms[k].node);
        if (p->is_delta()) return id_str(n.id) + " references realized " + id_str(terms[k].node);
        if (p->id == n.id) return id_str(n.id) + " references itself";
      }
    } else if (const auto* b = std::get_if<BernoulliDist>(&n.dist)) {
      if (!(b->prob >= 0.0 && b->prob <= 1.0)) return id_str(n.id) + " has probability " + format_g17(b->prob);
    }
  }
  if (topological_order().size() != nodes_.size()) return "parent relation has a cycle";
  return {};
}

std::string SymbolicState::dump() const {
  std::ostringstream out;
  for (NodeId id : topological_order()) {
    const Node& n = node(id);
    out << id_str(id) << " ";
    if (const auto* g = std::get_if<GaussianDist>(&n.dist)) {
      out << "N(" << g->mean.to_string() << ", " << format_g17(g->variance) << ")";
    } else if (const auto* b = std::get_if<BernoulliDist>(&n.dist)) {
      out << "B(" << format_g17(b->prob) << ")";
    } else {
      out << "D(" << format_g17(std::get<DeltaDist>(n.dist).value) << ")";
    }
    out << " " << to_string(n.ann) << " @" << n.origin.stmt << ":" << n.origin.iteration << "\n";
  }
  return out.str();
}

}  // namespace hppl
