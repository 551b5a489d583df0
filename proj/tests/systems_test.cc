#include "contrakt/systems.h"

#include <cmath>

#include <gtest/gtest.h>

#include "contrakt/error.h"
#include "contrakt/measures.h"
#include "test_util.h"

namespace contrakt {
namespace {

WeightedDigraph k2() { return WeightedDigraph(2, {{0, 1, 1.0}}, false); }
WeightedDigraph k3() {
  return WeightedDigraph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}, false);
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

double inf_norm(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

void expect_jacobian_matches(const DynSystem& sys, testing::Gen& g, double box = 2.0) {
  for (int s = 0; s < 50; ++s) {
    Vector x(sys.dim);
    for (int i = 0; i < sys.dim; ++i) x(i) = g.uniform(-box, box);
    const double t = g.uniform(0.0, 10.0);
    const Matrix df = sys.jacobian(t, x);
    const Matrix fd = finite_difference_jacobian(sys, t, x);
    EXPECT_LE(inf_norm(df - fd), 1e-5 * (1.0 + inf_norm(df))) << sys.name;
  }
}

TEST(AffineAveraging, K2Equilibrium) {
  const DynSystem sys = affine_averaging(k2(), vec({1, -1}));
  EXPECT_EQ(sys.equilibria, EquilibriumKind::kAffineSet);
  EXPECT_FALSE(sys.predicted_unbounded);
  // L^+ of K2 is L/4, so L^+ b = (0.5, -0.5).
  const Vector lim = sys.predicted_limit(vec({0, 0}));
  EXPECT_NEAR(lim(0), 0.5, 1e-12);
  EXPECT_NEAR(lim(1), -0.5, 1e-12);
  EXPECT_LE(sys.f(0.0, lim).norm(), 1e-12);
  ASSERT_TRUE(sys.predicted_rate.has_value());
  EXPECT_NEAR(sys.predicted_rate->value, 2.0, 1e-12);
}

TEST(AffineAveraging, UnboundedAndConsensus) {
  EXPECT_TRUE(affine_averaging(k2(), vec({1, 1})).predicted_unbounded);
  const DynSystem sys = affine_averaging(k3(), Vector::Zero(3));
  const Vector lim = sys.predicted_limit(vec({3, 0, 0}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(lim(i), 1.0, 1e-12);
}

TEST(AffineAveraging, RequiresReachability) {
  try {
    affine_averaging(WeightedDigraph(3, {{0, 1, 1.0}}, false), Vector::Zero(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotReachable);
  }
}

TEST(AffineAveraging, ExactLimitIsEquilibriumOnDigraphs) {
  testing::Gen g(301);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = g.integer(2, 8);
    const WeightedDigraph gr = g.strongly_connected_digraph(n);
    const Vector v = dominant_left_eigenvector(laplacian(gr));
    Vector b = g.vector(n);
    b -= (v.dot(b) / v.squaredNorm()) * v;
    const DynSystem sys = affine_averaging(gr, b);
    const Vector x0 = g.vector(n);
    const Vector lim = sys.predicted_limit(x0);
    EXPECT_LE(sys.f(0.0, lim).norm(), 1e-9);
    EXPECT_NEAR(v.dot(lim), v.dot(x0), 1e-9);
  }
}

TEST(AffineFlow, ExactLimitIsEquilibrium) {
  testing::Gen g(302);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = g.integer(2, 8);
    const WeightedDigraph gr = g.strongly_connected_digraph(n);
    Vector b = g.vector(n);
    b.array() -= b.mean();
    const DynSystem sys = affine_flow(gr, b);
    const Vector x0 = g.vector(n);
    const Vector lim = sys.predicted_limit(x0);
    EXPECT_LE(sys.f(0.0, lim).norm(), 1e-9);
    EXPECT_NEAR(lim.sum(), x0.sum(), 1e-9);
  }
  EXPECT_TRUE(affine_flow(k2(), vec({1, 0})).predicted_unbounded);
}

TEST(AffineFlow, SymmetricMatchesAveraging) {
  const Vector x0 = vec({0.3, -1.1});
  const Vector a = affine_averaging(k2(), vec({1, -1})).predicted_limit(x0);
  const Vector f = affine_flow(k2(), vec({1, -1})).predicted_limit(x0);
  EXPECT_LE((a - f).norm(), 1e-12);
  // b = 0: (1^T x0) v.
  const Vector c = affine_flow(k3(), Vector::Zero(3)).predicted_limit(vec({3, 0, 0}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(c(i), 1.0, 1e-12);
}

TEST(ClosedForms, AgreeOnBalancedGraphs) {
  testing::Gen g(303);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(2, 8);
    const WeightedDigraph gr = g.connected_graph(n);
    const Matrix l = laplacian(gr);
    const Vector v = dominant_left_eigenvector(l);
    Vector b = g.vector(n);
    b.array() -= b.mean();
    const Vector x0 = g.vector(n);
    EXPECT_LE((affine_averaging(gr, b).predicted_limit(x0) -
               averaging_limit_closed_form(l, v, b, x0)).norm(), 1e-10);
    EXPECT_LE((affine_flow(gr, b).predicted_limit(x0) -
               flow_limit_closed_form(l, v, b, x0)).norm(), 1e-10);
  }
}

TEST(PrimalDual, QuadraticK2) {
  const std::vector<Cost> costs = {quadratic_cost(vec({1.0})), quadratic_cost(vec({3.0}))};
  PrimalDualInfo info;
  const DynSystem sys = primal_dual(k2(), costs, 1, &info);
  EXPECT_EQ(sys.dim, 4);
  EXPECT_NEAR(info.x_star(0), 2.0, 1e-10);
  EXPECT_GT(info.predicted_rate, 0.0);
  const Vector s0 = vec({0, 0, 0.4, 0.2});
  const Vector lim = sys.predicted_limit(s0);
  EXPECT_LE(sys.f(0.0, lim).norm(), 1e-9);
  EXPECT_NEAR(lim(2) + lim(3), 0.6, 1e-12);
}

TEST(PrimalDual, DualLimitForms) {
  const std::vector<Cost> costs = {quadratic_cost(vec({1.0})), quadratic_cost(vec({3.0}))};
  const DualLimits d = primal_dual_dual_limits(k2(), costs, 1, vec({2.0}), vec({0.4, 0.2}));
  EXPECT_NEAR(d.sum_form(0), 0.6, 1e-12);
  EXPECT_NEAR(d.mean_form(0), 0.3, 1e-12);
  // grad h = (1, -1), L^+ = L/4: exact = 0.3 - (0.5, -0.5).
  EXPECT_NEAR(d.exact(0), -0.2, 1e-12);
  EXPECT_NEAR(d.exact(1), 0.8, 1e-12);
}

TEST(PrimalDual, QuarticMixAndSingleNode) {
  const std::vector<Cost> costs = {
      sum_of_costs({quartic_cost(vec({1.0, -1.0})), quadratic_cost(vec({0.0, 0.0}), 0.1)}),
      quartic_cost(vec({-0.5, 2.0})), log_sum_exp_cost(vec({0.2, 0.3}))};
  PrimalDualInfo info;
  const DynSystem sys = primal_dual(k3(), costs, 2, &info);
  const Vector grad = sum_of_costs(costs).gradient(info.x_star);
  EXPECT_LE(grad.norm(), 1e-9);
  EXPECT_GT(info.predicted_rate, 0.0);

  const std::vector<Cost> one = {quartic_cost(vec({1.5}))};
  const DynSystem flow = primal_dual(WeightedDigraph(1, {}, false), one, 1);
  EXPECT_NEAR(flow.f(0.0, vec({0.5, 7.0}))(0), 1.0, 1e-12);
  EXPECT_NEAR(flow.f(0.0, vec({0.5, 7.0}))(1), 0.0, 1e-12);
}

TEST(PrimalDual, RejectsNonConvexCost) {
  Cost bad{"concave", 1, [](const Vector& x) { return -x.squaredNorm(); },
           [](const Vector& x) -> Vector { return -2.0 * x; },
           [](const Vector&) -> Matrix { return Matrix::Constant(1, 1, -2.0); }};
  // minimize_sum runs on the total, which is convex here; the per-node check catches it.
  const std::vector<Cost> costs = {bad, quadratic_cost(vec({0.0}), 5.0)};
  try {
    primal_dual(k2(), costs, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonConvexCost);
  }
}

TEST(DiffusiveNetwork, SyncSubspaceAndSingleNode) {
  Matrix a(2, 2);
  a << 0.3, 1.0, -1.0, 0.3;
  const DynSystem net = diffusive_network(k3(), linear_system(a));
  EXPECT_EQ(net.dim, 6);
  ASSERT_TRUE(net.known_kernel.has_value());
  const Matrix j = net.jacobian(0.0, Vector::Zero(6));
  EXPECT_TRUE(is_invariant(to_complex(j), to_complex(*net.known_kernel)));
  ASSERT_TRUE(net.predicted_rate.has_value());
  EXPECT_NEAR(net.predicted_rate->value, 3.0 - 0.3, 1e-10);

  const DynSystem single = diffusive_network(WeightedDigraph(1, {}, false), linear_system(a));
  EXPECT_LE((single.jacobian(0.0, Vector::Zero(2)) - a).norm(), 1e-15);

  try {
    diffusive_network(WeightedDigraph(3, {{0, 1, 1.0}}, false), linear_system(a));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotConnected);
  }
}

TEST(DiffusiveNetwork, ZeroInternalIsConsensus) {
  const DynSystem net = diffusive_network(k2(), linear_system(Matrix::Zero(1, 1)));
  EXPECT_LE((net.jacobian(0.0, Vector::Zero(2)) + laplacian(k2())).norm(), 1e-15);
}

TEST(LotkaVolterra, Examples) {
  const LotkaVolterra lv1 = lotka_volterra(-Matrix::Identity(2, 2), vec({1, 1}));
  EXPECT_LE((lv1.equilibrium() - vec({1, 1})).norm(), 1e-14);
  Matrix a(2, 2);
  a << -2, 1, 1, -2;
  const LotkaVolterra lv = lotka_volterra(a, vec({1, 1}));
  EXPECT_LE((lv.equilibrium() - vec({1, 1})).norm(), 1e-14);
  const Vector v = lv.weight();
  EXPECT_LE((a.transpose() * v + Vector::Ones(2)).norm(), 1e-14);
  EXPECT_NEAR(v(0), v(1), 1e-14);
  EXPECT_LE((lv.log_system.f(0.0, Vector::Zero(2))).norm(), 1e-14);
}

TEST(LotkaVolterra, Errors) {
  Matrix a(2, 2);
  a << -1, -0.5, 0, -1;
  try {
    lotka_volterra(a, vec({1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotMetzler);
  }
  a << 1, 0, 0, -1;
  const LotkaVolterra lv = lotka_volterra(a, vec({1, 1}));
  try {
    lv.equilibrium();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotHurwitz);
  }
}

TEST(ToyExample, Systems) {
  const DynSystem semi = toy_example("semi_only");
  // (e^-t, e^t) is a trajectory: f at t equals its derivative.
  const double t = 0.7;
  const Vector f = semi.f(t, vec({std::exp(-t), std::exp(t)}));
  EXPECT_NEAR(f(0), -std::exp(-t), 1e-14);
  EXPECT_NEAR(f(1), std::exp(t), 1e-14);
  const DynSystem weak = toy_example("weak_only");
  EXPECT_NEAR(weak.f(0, vec({0.3, 0.4})).dot(vec({0.3, 0.4})), 0.0, 1e-15);
  const DynSystem lin = toy_example("linear_2x2");
  EXPECT_TRUE(is_invariant(to_complex(lin.jacobian(0, Vector::Zero(2))),
                           to_complex(*lin.known_kernel)));
  try {
    toy_example("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownName);
  }
}

TEST(Jacobians, MatchFiniteDifferences) {
  testing::Gen g(310);
  std::vector<DynSystem> systems;
  systems.push_back(affine_averaging(g.strongly_connected_digraph(5), g.vector(5)));
  systems.push_back(affine_flow(g.strongly_connected_digraph(4), g.vector(4)));
  systems.push_back(primal_dual(
      k3(),
      {quartic_cost(vec({1.0, 0.0})), quadratic_cost(vec({0.5, 0.5})),
       log_sum_exp_cost(vec({-1.0, 0.3}))},
      2));
  systems.push_back(diffusive_network(k3(), hopf_oscillator(1.0, 2.0)));
  systems.push_back(hopf_oscillator(0.5, 1.0));
  Matrix a(2, 2);
  a << -2, 1, 1, -2;
  const LotkaVolterra lv = lotka_volterra(a, vec({1, 1}));
  systems.push_back(lv.log_system);
  for (const char* name : {"semi_only", "weak_only", "linear_2x2"})
    systems.push_back(toy_example(name));
  for (const DynSystem& sys : systems) expect_jacobian_matches(sys, g);

  // The LV system itself lives on the positive orthant.
  for (int s = 0; s < 50; ++s) {
    const Vector x = vec({g.uniform(0.1, 3.0), g.uniform(0.1, 3.0)});
    const Matrix df = lv.system.jacobian(0.0, x);
    EXPECT_LE(inf_norm(df - finite_difference_jacobian(lv.system, 0.0, x)),
              1e-5 * (1.0 + inf_norm(df)));
  }
}

TEST(HopfOscillator, MeasureBound) {
  testing::Gen g(311);
  const DynSystem h = hopf_oscillator(0.4, 3.0);
  for (int s = 0; s < 100; ++s) {
    const Vector x = vec({g.uniform(-2, 2), g.uniform(-2, 2)});
    EXPECT_NEAR(matrix_measure(to_complex(h.jacobian(0, x)), PNorm::two()),
                0.4 - x.squaredNorm(), 1e-10);
  }
}

TEST(MinimizeSum, QuadraticMean) {
  const std::vector<Cost> costs = {quadratic_cost(vec({1, 2})), quadratic_cost(vec({3, -2})),
                                   quadratic_cost(vec({-1, 3}))};
  const Vector x = minimize_sum(costs, Vector::Zero(2));
  EXPECT_NEAR(x(0), 1.0, 1e-12);
  EXPECT_NEAR(x(1), 1.0, 1e-12);
}

}  // namespace
}  // namespace contrakt
