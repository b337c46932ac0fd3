#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hppl/symbolic/state.hpp"
#include "joint_check.hpp"
#include "test_util.hpp"

using namespace hppl;

namespace {

AffineExpr mean_of(const SymbolicState& s, NodeId id) { return std::get<GaussianDist>(s.node(id).dist).mean; }
double var_of(const SymbolicState& s, NodeId id) { return std::get<GaussianDist>(s.node(id).dist).variance; }

// Dense linear-Gaussian network: x_k = b_k + sum_j A[k][j] x_j + noise_k,
// nodes listed in creation order.
struct DenseNet {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<double> d;

  std::vector<double> means() const {
    std::vector<double> mu(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) {
      mu[k] = b[k];
      for (std::size_t j = 0; j < k; ++j) mu[k] += a[k][j] * mu[j];
    }
    return mu;
  }

  std::vector<std::vector<double>> covariance() const {
    const std::size_t n = b.size();
    // L = (I - A)^-1 by forward substitution, column by column.
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t k = 0; k < n; ++k) {
        double v = k == c ? 1.0 : 0.0;
        for (std::size_t j = 0; j < k; ++j) v += a[k][j] * l[j][c];
        l[k][c] = v;
      }
    }
    std::vector<std::vector<double>> cov(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) cov[i][j] += l[i][k] * d[k] * l[j][k];
      }
    }
    return cov;
  }
};

}  // namespace

TEST(Affine, CanonicalForm) {
  AffineExpr e(1.0);
  e.add_term(NodeId{3}, 2.0);
  e.add_term(NodeId{1}, -1.0);
  e.add_term(NodeId{3}, -2.0);
  ASSERT_EQ(e.terms().size(), 1u);
  EXPECT_EQ(e.terms()[0].node, NodeId{1});
  e.substitute(NodeId{1}, 4.0);
  EXPECT_TRUE(e.is_constant());
  EXPECT_EQ(e.intercept(), -3.0);
  AffineExpr f = AffineExpr::variable(NodeId{2}, 0.5) * 2.0 + AffineExpr(1.0);
  EXPECT_EQ(f.to_string(), "1 + 1*n2");
  EXPECT_TRUE((f * 0.0).is_constant());
}

TEST(State, AssumeFoldsRealizedParents) {
  SymbolicState s;
  NodeId x = s.assume(GaussianDist{AffineExpr(0.0), 1.0});
  s.realize(x, 2.0);
  NodeId y = s.assume(GaussianDist{AffineExpr::variable(x, 3.0), 1.0});
  EXPECT_TRUE(s.node(y).is_root());
  EXPECT_EQ(mean_of(s, y).intercept(), 6.0);
  EXPECT_THROW(s.assume(GaussianDist{AffineExpr::variable(NodeId{42}), 1.0}), SymbolicError);
  EXPECT_THROW(s.assume(GaussianDist{AffineExpr(0.0), 0.0}), SymbolicError);
  EXPECT_THROW(s.assume(BernoulliDist{1.5}), SymbolicError);
}

TEST(State, SwapTwoNodes) {
  // x ~ N(0, 1), y | x ~ N(2x + 1, 4).
  SymbolicState s;
  NodeId x = s.assume(GaussianDist{AffineExpr(0.0), 1.0});
  NodeId y = s.assume(GaussianDist{AffineExpr::variable(x, 2.0) + AffineExpr(1.0), 4.0});
  s.swap(y, x);
  // Oracle from the joint covariance [[1, 2], [2, 8]] with mean (0, 1).
  const double cov_xy = 2.0, var_y = 8.0, var_x = 1.0;
  EXPECT_NEAR(mean_of(s, y).intercept(), 1.0, 1e-15);
  EXPECT_TRUE(mean_of(s, y).is_constant());
  EXPECT_NEAR(var_of(s, y), var_y, 1e-12);
  EXPECT_NEAR(mean_of(s, x).coefficient(y), cov_xy / var_y, 1e-15);
  EXPECT_NEAR(mean_of(s, x).intercept(), -cov_xy / var_y * 1.0, 1e-15);
  EXPECT_NEAR(var_of(s, x), var_x - cov_xy * cov_xy / var_y, 1e-15);
  EXPECT_EQ(s.check_invariants(), "");
}

TEST(State, SwapRejectsNonConjugate) {
  SymbolicState s;
  NodeId c = s.assume(BernoulliDist{0.3});
  NodeId x = s.assume(GaussianDist{AffineExpr(0.0), 1.0});
  NodeId y = s.assume(GaussianDist{AffineExpr::variable(x) + AffineExpr::variable(c), 1.0});
  NodeId z = s.assume(GaussianDist{AffineExpr(0.0), 1.0});
  EXPECT_THROW(s.swap(y, c), SymbolicError);
  EXPECT_THROW(s.swap(z, x), SymbolicError);
  NodeId w = s.assume(GaussianDist{AffineExpr::variable(x) + AffineExpr::variable(z), 1.0});
  NodeId v = s.assume(GaussianDist{AffineExpr::variable(x) + AffineExpr::variable(w), 1.0});
  try {
    s.swap(v, x);
    FAIL();
  } catch (const SymbolicError& e) {
    EXPECT_EQ(e.kind(), SymbolicError::Kind::NotConjugate);
  }
}

TEST(State, ObserveUpdatesParent) {
  // x ~ N(0, 100), y ~ N(x, 1), y observed at 2.
  SymbolicState s;
  NodeId x = s.assume(GaussianDist{AffineExpr(0.0), 100.0});
  NodeId y = s.assume(GaussianDist{AffineExpr::variable(x), 1.0});
  auto pred = std::get<GaussianParams>(s.marginal_of(y));
  EXPECT_NEAR(pred.variance, 101.0, 1e-12);
  EXPECT_FALSE(s.hoist(y).has_value());
  EXPECT_NEAR(s.score(y, 2.0), test::normal_logpdf(2.0, 0.0, 101.0), 1e-12);
  EXPECT_NEAR(s.score(y, 2.0), -3.2463, 1e-4);
  s.realize(y, 2.0);
  auto post = std::get<GaussianParams>(s.marginal_of(x));
  EXPECT_NEAR(post.mean, 200.0 / 101.0, 1e-12);
  EXPECT_NEAR(post.variance, 100.0 / 101.0, 1e-12);
}

TEST(State, HoistBlockedByBernoulliLeavesStateUntouched) {
  SymbolicState s;
  NodeId c = s.assume(BernoulliDist{0.1});
  NodeId x = s.assume(GaussianDist{AffineExpr(0.0), 1.0});
  NodeId y = s.assume(GaussianDist{AffineExpr::variable(x) + AffineExpr::variable(c, 3.0), 1.0});
  SymbolicState before = s;
  auto blocked = s.hoist(y);
  ASSERT_TRUE(blocked.has_value());
  EXPECT_EQ(blocked->by, c);
  EXPECT_EQ(s, before);
  EXPECT_EQ(std::get<NeedsApprox>(s.marginal_of(y)).by, c);
  s.realize(c, 1.0);
  auto m = std::get<GaussianParams>(s.marginal_of(y));
  EXPECT_NEAR(m.mean, 3.0, 1e-15);
  EXPECT_NEAR(m.variance, 2.0, 1e-15);
}

TEST(State, HoistChainMakesTargetRoot) {
  SymbolicState s;
  NodeId prev = s.assume(GaussianDist{AffineExpr(0.0), 100.0});
  std::vector<NodeId> chain{prev};
  for (int k = 0; k < 30; ++k) {
    prev = s.assume(GaussianDist{AffineExpr::variable(prev), 1.0});
    chain.push_back(prev);
  }
  auto expected = std::get<GaussianParams>(s.marginal_of(prev));
  EXPECT_NEAR(expected.variance, 130.0, 1e-9);
  EXPECT_FALSE(s.hoist(prev).has_value());
  EXPECT_TRUE(s.node(prev).is_root());
  EXPECT_NEAR(var_of(s, prev), 130.0, 1e-9);
  EXPECT_EQ(s.check_invariants(), "");
  s.realize(prev, 5.0);
  std::vector<NodeId> roots{prev};
  s.collect(roots);
  EXPECT_EQ(s.size(), 1u);
}

TEST(State, MarginalsMatchCovarianceOracle) {
  std::mt19937_64 rng(7);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 5;
    DenseNet net;
    net.a.assign(n, std::vector<double>(n, 0.0));
    SymbolicState s;
    std::vector<NodeId> ids;
    for (std::size_t k = 0; k < n; ++k) {
      AffineExpr mean(uni(-3, 3));
      net.b.push_back(mean.intercept());
      for (std::size_t j = 0; j < k; ++j) {
        if (uni(0, 1) < 0.5) {
          double c = uni(-2, 2);
          net.a[k][j] = c;
          mean.add_term(ids[j], c);
        }
      }
      net.d.push_back(uni(0.2, 5));
      ids.push_back(s.assume(GaussianDist{mean, net.d.back()}));
    }
    auto mu = net.means();
    auto cov = net.covariance();
    for (std::size_t k = 0; k < n; ++k) {
      auto m = std::get<GaussianParams>(s.marginal_of(ids[k]));
      EXPECT_NEAR(m.mean, mu[k], 1e-9 * (1 + std::abs(mu[k])));
      EXPECT_NEAR(m.variance, cov[k][k], 1e-9 * cov[k][k]);
    }
    // Hoisting one node in place leaves every other marginal unchanged.
    NodeId target = ids[n - 1 - trial % n];
    SymbolicState h = s;
    ASSERT_FALSE(h.hoist(target).has_value());
    ASSERT_TRUE(h.node(target).is_root());
    ASSERT_EQ(h.check_invariants(), "");
    for (std::size_t k = 0; k < n; ++k) {
      auto m = std::get<GaussianParams>(h.marginal_of(ids[k]));
      EXPECT_NEAR(m.mean, mu[k], 1e-9 * (1 + std::abs(mu[k])));
      EXPECT_NEAR(m.variance, cov[k][k], 1e-9 * cov[k][k]);
    }
  }
}

TEST(State, ConditioningMatchesCovarianceOracle) {
  std::mt19937_64 rng(11);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (int trial = 0; trial < 100; ++trial) {
    // x0 ~ N(b0, d0); x1 ~ N(b1 + a x0, d1); x2 ~ N(b2 + c0 x0 + c1 x1, d2); x2 observed.
    DenseNet net;
    net.a.assign(3, std::vector<double>(3, 0.0));
    net.b = {uni(-3, 3), uni(-3, 3), uni(-3, 3)};
    net.d = {uni(0.2, 5), uni(0.2, 5), uni(0.2, 5)};
    net.a[1][0] = uni(-2, 2);
    net.a[2][0] = uni(-2, 2);
    net.a[2][1] = uni(-2, 2);
    SymbolicState s;
    NodeId x0 = s.assume(GaussianDist{AffineExpr(net.b[0]), net.d[0]});
    NodeId x1 = s.assume(GaussianDist{AffineExpr(net.b[1]) + AffineExpr::variable(x0, net.a[1][0]), net.d[1]});
    NodeId x2 = s.assume(GaussianDist{
        AffineExpr(net.b[2]) + AffineExpr::variable(x0, net.a[2][0]) + AffineExpr::variable(x1, net.a[2][1]),
        net.d[2]});
    const double obs = uni(-4, 4);
    auto mu = net.means();
    auto cov = net.covariance();
    ASSERT_FALSE(s.hoist(x2).has_value());
    EXPECT_NEAR(s.score(x2, obs), test::normal_logpdf(obs, mu[2], cov[2][2]), 1e-9);
    s.realize(x2, obs);
    for (int k = 0; k < 2; ++k) {
      NodeId id = k == 0 ? x0 : x1;
      double m = mu[k] + cov[k][2] / cov[2][2] * (obs - mu[2]);
      double v = cov[k][k] - cov[k][2] * cov[k][2] / cov[2][2];
      auto got = std::get<GaussianParams>(s.marginal_of(id));
      EXPECT_NEAR(got.mean, m, 1e-9 * (1 + std::abs(m)));
      EXPECT_NEAR(got.variance, v, 1e-9 * (1 + v));
    }
  }
}

TEST(State, RandomSwapsPreserveJoint) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 300; ++k) {
    auto t = test::random_swap_trial(rng, 2 + k % 2);
    ASSERT_TRUE(t.ok) << t.description << " error " << t.max_error;
  }
}

TEST(State, RealizeRules) {
  SymbolicState s;
  NodeId c = s.assume(BernoulliDist{0.25});
  NodeId x = s.assume(GaussianDist{AffineExpr(0.0), 1.0});
  NodeId y = s.assume(GaussianDist{AffineExpr::variable(x), 1.0});
  EXPECT_THROW(s.realize(c, 0.5), SymbolicError);
  EXPECT_THROW(s.realize(y, 0.0), SymbolicError);
  EXPECT_NEAR(s.score(c, 1.0), std::log(0.25), 1e-15);
  EXPECT_NEAR(s.score(c, 0.0), std::log(0.75), 1e-15);
  s.realize(c, 1.0);
  try {
    s.realize(c, 1.0);
    FAIL();
  } catch (const SymbolicError& e) {
    EXPECT_EQ(e.kind(), SymbolicError::Kind::AlreadyRealized);
  }
  EXPECT_EQ(s.score(c, 1.0), 0.0);
  EXPECT_TRUE(std::isinf(s.score(c, 0.0)));
  s.realize(x, 3.0);
  EXPECT_TRUE(s.node(y).is_root());
  EXPECT_EQ(mean_of(s, y).intercept(), 3.0);
}

TEST(State, SampleRootIsDeterministicPerStream) {
  SymbolicState s;
  NodeId x = s.assume(GaussianDist{AffineExpr(1.0), 4.0});
  NodeId c = s.assume(BernoulliDist{1.0});
  Stream a(99), b(99);
  EXPECT_EQ(s.sample_root(x, a), s.sample_root(x, b));
  EXPECT_EQ(s.sample_root(c, a), 1.0);
  double sum = 0, sq = 0;
  Stream r(5);
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    double v = s.sample_root(x, r);
    sum += v;
    sq += v * v;
  }
  double mean = sum / n;
  EXPECT_NEAR(mean, 1.0, 4 * 2.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n - mean * mean, 4.0, 0.2);
}

TEST(State, LiveCountAndCollect) {
  SymbolicState s;
  NodeId a = s.assume(GaussianDist{AffineExpr(0.0), 1.0});
  NodeId b = s.assume(GaussianDist{AffineExpr::variable(a), 1.0});
  NodeId c = s.assume(GaussianDist{AffineExpr(0.0), 1.0});
  NodeId d = s.assume(BernoulliDist{0.5});
  s.realize(d, 1.0);
  std::vector<NodeId> roots{b, d};
  EXPECT_EQ(s.live_count(roots), 2u);
  s.collect(roots);
  EXPECT_FALSE(s.contains(c));
  EXPECT_TRUE(s.contains(d));
  // a has no name and a single child, so it is folded into b
  EXPECT_FALSE(s.contains(a));
  EXPECT_EQ(s.size(), 2u);
  auto m = std::get<GaussianParams>(s.marginal_of(b));
  EXPECT_DOUBLE_EQ(m.mean, 0.0);
  EXPECT_DOUBLE_EQ(m.variance, 2.0);
  EXPECT_EQ(s.check_invariants(), "");
}

TEST(State, CollectKeepsSharedParents) {
  SymbolicState s;
  NodeId a = s.assume(GaussianDist{AffineExpr(1.0), 1.0});
  NodeId b = s.assume(GaussianDist{AffineExpr::variable(a), 1.0});
  NodeId c = s.assume(GaussianDist{AffineExpr::variable(a) * 2.0, 1.0});
  std::vector<NodeId> roots{b, c};
  s.collect(roots);
  EXPECT_TRUE(s.contains(a));
  EXPECT_EQ(s.live_count(roots), 3u);
  NodeId e = s.assume(GaussianDist{AffineExpr::variable(b), 1.0});
  std::vector<NodeId> only_e{e};
  SymbolicState before = s;
  s.collect(only_e);
  // the chain a -> b -> e collapses into e
  EXPECT_EQ(s.size(), 1u);
  auto m = std::get<GaussianParams>(s.marginal_of(e));
  auto want = std::get<GaussianParams>(before.marginal_of(e));
  EXPECT_NEAR(m.mean, want.mean, 1e-12);
  EXPECT_NEAR(m.variance, want.variance, 1e-12);
}

TEST(State, DumpIsTopological) {
  SymbolicState s;
  NodeId x = s.assume(GaussianDist{AffineExpr(0.0), 100.0});
  NodeId y = s.assume(GaussianDist{AffineExpr::variable(x), 1.0}, Annotation::Exact, Origin{3, 1});
  s.swap(y, x);
  EXPECT_EQ(s.dump(),
            "n1 N(0, 101) exact @3:1\n"
            "n0 N(0 + 0.99009900990099009*n1, 0.99009900990099009) none @0:0\n");
}
