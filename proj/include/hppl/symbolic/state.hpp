#pragma once

#include <boost/container/small_vector.hpp>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hppl/lang/ast.hpp"
#include "hppl/symbolic/affine.hpp"
#include "hppl/util/rng.hpp"

namespace hppl {

struct GaussianDist {
  AffineExpr mean;
  double variance = 1.0;
  friend bool operator==(const GaussianDist&, const GaussianDist&) = default;
};

struct BernoulliDist {
  double prob = 0.5;
  friend bool operator==(const BernoulliDist&, const BernoulliDist&) = default;
};

struct DeltaDist {
  double value = 0.0;
  friend bool operator==(const DeltaDist&, const DeltaDist&) = default;
};

using SymDist = std::variant<GaussianDist, BernoulliDist, DeltaDist>;

/// Where a node was created: the Sample statement and the iteration count
/// of the innermost enclosing loop (0 outside loops).
struct Origin {
  StmtId stmt = 0;
  int iteration = 0;
  friend bool operator==(const Origin&, const Origin&) = default;
};

struct Node {
  NodeId id;
  SymDist dist;
  Annotation ann = Annotation::None;
  Origin origin;
  // The distribution family the node was created with; survives realization.
  bool bernoulli_family = false;

  bool is_delta() const { return std::holds_alternative<DeltaDist>(dist); }
  bool is_gaussian() const { return std::holds_alternative<GaussianDist>(dist); }
  bool is_bernoulli() const { return std::holds_alternative<BernoulliDist>(dist); }
  /// True when the distribution has no node-valued terms.
  bool is_root() const;

  friend bool operator==(const Node&, const Node&) = default;
};

class SymbolicError : public std::runtime_error {
 public:
  enum class Kind {
    UnknownNode,
    UnknownParent,
    NotConjugate,
    NotRoot,
    AlreadyRealized,
    DomainError,
    DegenerateVariance,
  };

  SymbolicError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Blocked {
  NodeId by;
  friend bool operator==(const Blocked&, const Blocked&) = default;
};

struct GaussianParams {
  double mean = 0.0;
  double variance = 0.0;
  friend bool operator==(const GaussianParams&, const GaussianParams&) = default;
};

struct BernoulliParam {
  double prob = 0.0;
  friend bool operator==(const BernoulliParam&, const BernoulliParam&) = default;
};

struct NeedsApprox {
  NodeId by;
  friend bool operator==(const NeedsApprox&, const NeedsApprox&) = default;
};

/// Result of marginal extraction. A realized node reports a Gaussian with
/// zero variance.
using Marginal = std::variant<GaussianParams, BernoulliParam, NeedsApprox>;

/// Variances at or below this are rejected rather than clamped.
inline constexpr double kVarianceFloor = 1e-300;

/// Graph of random-variable nodes with symbolic distributions. Gaussian
/// means are affine in parent nodes; Bernoulli and Delta nodes have
/// constant parameters. The parent relation is acyclic and realized
/// (Delta) nodes are never referenced by any mean.
///
/// The state is a value type: copies are independent.
class SymbolicState {
 public:
  SymbolicState() = default;

  /// Adds a node. Gaussian means may reference existing Gaussian or
  /// Bernoulli nodes; references to realized nodes are folded.
  NodeId assume(SymDist dist, Annotation ann = Annotation::None, Origin origin = {});

  /// Conjugate exchange of a Gaussian child and a Gaussian parent it
  /// references: the child becomes marginal with respect to the parent and
  /// the parent becomes conditioned on the child. The parent need not be a
  /// root; its own parents move onto the child. The joint is preserved.
  /// Throws NotConjugate if either node is not Gaussian, the child does not
  /// reference the parent, or another parent of the child descends from it.
  void swap(NodeId child, NodeId parent);

  /// Makes `target` a root using conjugate exchanges only. Returns the
  /// first (topological order, ties by id) Bernoulli ancestor that prevents
  /// this, leaving the state untouched in that case.
  std::optional<Blocked> hoist(NodeId target);

  /// Turns a root into Delta{value} and folds it into every mean that
  /// references it.
  void realize(NodeId target, double value);

  /// Log-density of `value` under a root's distribution.
  double score(NodeId target, double value) const;

  /// Draws from a root's distribution.
  double sample_root(NodeId target, Stream& rng) const;

  /// Marginal of any node, computed on a copy; the state is not modified.
  Marginal marginal_of(NodeId target) const;

  /// Non-Delta nodes reachable from `roots` through parent edges.
  std::size_t live_count(std::span<const NodeId> roots) const;

  /// Drops every node not reachable from `roots` through parent edges.
  /// The dropped set is closed under children, so this marginalizes it out.
  /// A Gaussian root outside `roots` with a single child is exchanged with
  /// that child first, which leaves it unreachable.
  void collect(std::span<const NodeId> roots);

  const Node& node(NodeId id) const;
  const Node* find(NodeId id) const;
  bool contains(NodeId id) const { return find(id) != nullptr; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  NodeId next_id() const { return NodeId{next_}; }

  /// Node-valued parents of `id`, ascending.
  std::vector<NodeId> parents(NodeId id) const;
  /// Transitive parents of `id`, ascending.
  std::vector<NodeId> ancestors(NodeId id) const;
  /// Deterministic topological order (Kahn's algorithm, smallest id first).
  std::vector<NodeId> topological_order() const;

  /// Empty string when every structural invariant holds; otherwise a
  /// description of the first violation.
  std::string check_invariants() const;

  /// One line per node in topological order, floats with 17 significant
  /// digits. Stable across runs; used for golden tests.
  std::string dump() const;

  friend bool operator==(const SymbolicState&, const SymbolicState&) = default;

 private:
  Node& node_mut(NodeId id);
  std::size_t index_of(NodeId id) const;
  void drop_unreachable(std::span<const NodeId> roots);
  bool has_bernoulli_ancestor(NodeId id) const;
  using Mask = boost::container::small_vector<char, 32>;
  Mask reachable(std::span<const NodeId> roots) const;

  // Topological order over node positions, kept valid across exchanges.
  struct Order {
    std::vector<std::size_t> seq;
    std::vector<std::size_t> pos;
  };
  Order order_positions() const;
  std::size_t last_parent(std::size_t target, const Order& order) const;
  std::vector<char> ancestor_mask(std::size_t i) const;
  bool shares_ancestry(std::size_t t, const std::vector<char>& mask) const;
  void hoist_gaussian(std::size_t target, Order& order);
  void exchange(NodeId child, NodeId parent);
  std::vector<NodeId> descendants_of_set(const std::vector<NodeId>& from) const;

  std::vector<Node> nodes_;  // sorted by id
  std::uint32_t next_ = 0;
};

}  // namespace hppl
