#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "madrom/diff/fdcheck.hpp"
#include "madrom/diff/graph.hpp"
#include "madrom/diff/jet.hpp"
#include "madrom/errors.hpp"

namespace {

using namespace madrom;
using namespace madrom::diff;

double lane(const Graph& g, const Jet2& j, NodeId id) { return lane_value(g, j, id)(0, 0); }

// Five-point stencils; truncation error O(h^4).
double fd5_first(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}
double fd5_second(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

// Relative error scaled by max(|a|, |b|, 1) so near-zero derivatives are
// judged on an absolute scale.
double scaled_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

TEST(LiftConstant, HasZeroDerivatives) {
  Graph g;
  const Jet2 c = lift_constant(g, 3.0, 2);
  EXPECT_EQ(g.scalar(c.val), 3.0);
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(lane(g, c, c.d1[k]), 0.0);
    EXPECT_EQ(lane(g, c, c.d2[k]), 0.0);
  }
  const Jet2 zero = lift_constant(g, 0.0, 1);
  EXPECT_EQ(g.scalar(zero.val), 0.0);
  EXPECT_EQ(lane(g, zero, zero.d1[0]), 0.0);
}

TEST(LiftConstant, SineOfConstantKeepsZeroDerivatives) {
  Graph g;
  const Jet2 s = jet_sin(g, lift_constant(g, -1.5, 1));
  EXPECT_EQ(g.scalar(s.val), std::sin(-1.5));
  EXPECT_EQ(lane(g, s, s.d1[0]), 0.0);
  EXPECT_EQ(lane(g, s, s.d2[0]), 0.0);
}

TEST(LiftConstant, RejectsNonFinite) {
  Graph g;
  EXPECT_THROW(lift_constant(g, std::numeric_limits<double>::quiet_NaN(), 1), std::invalid_argument);
  EXPECT_THROW(lift_constant(g, std::numeric_limits<double>::infinity(), 1), std::invalid_argument);
}

TEST(LiftCoordinate, SeedsUnitFirstDerivative) {
  Graph g;
  const Jet2 a = lift_coordinate(g, 0.7, 0, 1);
  EXPECT_EQ(g.scalar(a.val), 0.7);
  EXPECT_EQ(lane(g, a, a.d1[0]), 1.0);
  EXPECT_EQ(lane(g, a, a.d2[0]), 0.0);
  const Jet2 b = lift_coordinate(g, 2.0, 1, 2);
  EXPECT_EQ(g.scalar(b.val), 2.0);
  EXPECT_EQ(lane(g, b, b.d1[0]), 0.0);
  EXPECT_EQ(lane(g, b, b.d1[1]), 1.0);
  EXPECT_EQ(lane(g, b, b.d2[0]), 0.0);
  EXPECT_EQ(lane(g, b, b.d2[1]), 0.0);
}

TEST(LiftCoordinate, RejectsIndexOutOfRange) {
  Graph g;
  EXPECT_THROW(lift_coordinate(g, 1.0, 1, 1), std::invalid_argument);
  EXPECT_THROW(lift_coordinate(g, 1.0, -1, 2), std::invalid_argument);
}

TEST(LiftCoordinate, SecondDerivativeOfSine) {
  Graph g;
  const double x = 0.83;
  const Jet2 s = jet_sin(g, lift_coordinate(g, x, 0, 1));
  EXPECT_DOUBLE_EQ(lane(g, s, s.d2[0]), -std::sin(x));
}

TEST(JetArith, SquareOfCoordinate) {
  Graph g;
  const Jet2 x = lift_coordinate(g, 1.0, 0, 1);
  const Jet2 sq = jet_arith(g, JetOp::kMul, x, &x);
  EXPECT_EQ(g.scalar(sq.val), 1.0);
  EXPECT_EQ(lane(g, sq, sq.d1[0]), 2.0);
  EXPECT_EQ(lane(g, sq, sq.d2[0]), 2.0);
}

TEST(JetArith, SineAtZero) {
  Graph g;
  const Jet2 s = jet_arith(g, JetOp::kSin, lift_coordinate(g, 0.0, 0, 1));
  EXPECT_EQ(g.scalar(s.val), 0.0);
  EXPECT_EQ(lane(g, s, s.d1[0]), 1.0);
  EXPECT_EQ(lane(g, s, s.d2[0]), 0.0);
}

TEST(JetArith, ExpSecondDerivativeMatchesFiniteDifference) {
  Graph g;
  const Jet2 e = jet_exp(g, lift_coordinate(g, 0.3, 0, 1));
  const double fd = central_second([](double x) { return std::exp(x); }, 0.3, 1e-4);
  EXPECT_LT(relative_error(lane(g, e, e.d2[0]), fd), 1e-6);
}

TEST(JetArith, RejectsWrongOperandCount) {
  Graph g;
  const Jet2 x = lift_coordinate(g, 0.5, 0, 1);
  EXPECT_THROW(jet_arith(g, JetOp::kMul, x), std::invalid_argument);
  EXPECT_THROW(jet_arith(g, JetOp::kSin, x, &x), std::invalid_argument);
}

TEST(JetArith, RejectsDimensionMismatch) {
  Graph g;
  const Jet2 a = lift_coordinate(g, 0.5, 0, 1);
  const Jet2 b = lift_coordinate(g, 0.5, 0, 2);
  EXPECT_THROW(jet_add(g, a, b), std::invalid_argument);
}

// Inner functions with nonzero first and second derivatives, evaluated both
// as jets and as plain doubles for the finite-difference oracle.
Jet2 inner_a(Graph& g, const Jet2& x) { return jet_add(g, jet_mul(g, jet_sin(g, x), x), jet_scale(g, x, 0.5)); }
double inner_a(double x) { return std::sin(x) * x + 0.5 * x; }
Jet2 inner_b(Graph& g, const Jet2& x) {
  return jet_add_node(g, jet_mul(g, jet_scale(g, x, 0.3), x), g.constant(1.5));
}
double inner_b(double x) { return 0.3 * x * x + 1.5; }

struct Case {
  const char* name;
  std::function<Jet2(Graph&, const Jet2&)> jet;
  std::function<double(double)> plain;
};

std::vector<Case> primitive_cases() {
  return {
      {"add", [](Graph& g, const Jet2& x) { return jet_add(g, inner_a(g, x), inner_b(g, x)); },
       [](double x) { return inner_a(x) + inner_b(x); }},
      {"sub", [](Graph& g, const Jet2& x) { return jet_sub(g, inner_a(g, x), inner_b(g, x)); },
       [](double x) { return inner_a(x) - inner_b(x); }},
      {"mul", [](Graph& g, const Jet2& x) { return jet_mul(g, inner_a(g, x), inner_b(g, x)); },
       [](double x) { return inner_a(x) * inner_b(x); }},
      {"div", [](Graph& g, const Jet2& x) { return jet_div(g, inner_a(g, x), inner_b(g, x)); },
       [](double x) { return inner_a(x) / inner_b(x); }},
      {"neg", [](Graph& g, const Jet2& x) { return jet_neg(g, inner_a(g, x)); },
       [](double x) { return -inner_a(x); }},
      {"sin", [](Graph& g, const Jet2& x) { return jet_sin(g, inner_a(g, x)); },
       [](double x) { return std::sin(inner_a(x)); }},
      {"cos", [](Graph& g, const Jet2& x) { return jet_cos(g, inner_a(g, x)); },
       [](double x) { return std::cos(inner_a(x)); }},
      {"exp", [](Graph& g, const Jet2& x) { return jet_exp(g, inner_a(g, x)); },
       [](double x) { return std::exp(inner_a(x)); }},
      {"pow3", [](Graph& g, const Jet2& x) { return jet_pow(g, inner_a(g, x), 3); },
       [](double x) { return std::pow(inner_a(x), 3); }},
      {"reciprocal", [](Graph& g, const Jet2& x) { return jet_reciprocal(g, inner_b(g, x)); },
       [](double x) { return 1.0 / inner_b(x); }},
  };
}

TEST(JetProperty, PrimitivesMatchCentralDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (const Case& c : primitive_cases()) {
    for (int trial = 0; trial < 100; ++trial) {
      const double x = dist(rng);
      Graph g;
      const Jet2 out = c.jet(g, lift_coordinate(g, x, 0, 1));
      const double d1 = lane(g, out, out.d1[0]);
      const double d2 = lane(g, out, out.d2[0]);
      EXPECT_LT(scaled_err(g.scalar(out.val), c.plain(x)), 1e-14) << c.name;
      EXPECT_LT(scaled_err(d1, fd5_first(c.plain, x, 1e-3)), 1e-5) << c.name << " x=" << x;
      EXPECT_LT(scaled_err(d2, fd5_second(c.plain, x, 1e-3)), 1e-4) << c.name << " x=" << x;
    }
  }
}

TEST(JetProperty, CoordinatesNeverMix) {
  Graph g;
  const Jet2 x = lift_coordinate(g, 0.4, 0, 2);
  const Jet2 y = lift_coordinate(g, -0.9, 1, 2);
  const Jet2 f = jet_mul(g, jet_sin(g, x), jet_exp(g, y));
  // d/dx and d/dy of sin(x) e^y, and their diagonal second derivatives.
  EXPECT_NEAR(lane(g, f, f.d1[0]), std::cos(0.4) * std::exp(-0.9), 1e-15);
  EXPECT_NEAR(lane(g, f, f.d1[1]), std::sin(0.4) * std::exp(-0.9), 1e-15);
  EXPECT_NEAR(lane(g, f, f.d2[0]), -std::sin(0.4) * std::exp(-0.9), 1e-15);
  EXPECT_NEAR(lane(g, f, f.d2[1]), std::sin(0.4) * std::exp(-0.9), 1e-15);
}

TEST(Backward, LinearExpression) {
  Graph g;
  const NodeId w = g.parameter(Block::Constant(1, 1, 2.0));
  const NodeId b = g.parameter(Block::Constant(1, 1, 1.0));
  const NodeId root = g.add(g.mul(w, g.constant(3.0)), b);
  const GradientMap grads = g.backward(root);
  ASSERT_EQ(grads.size(), 2u);
  EXPECT_EQ((*grads.find(w))(0, 0), 3.0);
  EXPECT_EQ((*grads.find(b))(0, 0), 1.0);
}

TEST(Backward, SineAtZero) {
  Graph g;
  const NodeId w = g.parameter(Block::Constant(1, 1, 0.0));
  const GradientMap grads = g.backward(g.sin(w));
  EXPECT_EQ((*grads.find(w))(0, 0), 1.0);
}

TEST(Backward, OnlyReachableLeavesAppear) {
  Graph g;
  const NodeId a = g.parameter(Block::Constant(1, 1, 2.0));
  const NodeId unused = g.parameter(Block::Constant(1, 1, 5.0));
  const GradientMap grads = g.backward(g.mul(a, a));
  EXPECT_EQ(grads.size(), 1u);
  EXPECT_NE(grads.find(a), nullptr);
  EXPECT_EQ(grads.find(unused), nullptr);
}

TEST(Backward, ReportsNonFiniteAdjointWithNode) {
  Graph g;
  const NodeId w = g.parameter(Block::Constant(1, 1, 0.0));
  const NodeId root = g.sum(g.reciprocal(w));
  try {
    g.backward(root);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_GE(e.node(), 0);
  }
}

TEST(Backward, RejectsNonScalarRoot) {
  Graph g;
  const NodeId w = g.parameter(Block::Ones(2, 1));
  EXPECT_THROW(g.backward(w), std::invalid_argument);
}

TEST(Backward, SumRuleOnSharedSubgraph) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    Graph g;
    Block wv(3, 3);
    for (Eigen::Index i = 0; i < wv.size(); ++i) wv(i) = normal(rng);
    Block xv(3, 4);
    for (Eigen::Index i = 0; i < xv.size(); ++i) xv(i) = normal(rng);
    const NodeId w = g.parameter(wv);
    const NodeId shared = g.sin(g.matmul(w, g.constant(xv)));
    const NodeId a = g.sum(g.mul(shared, shared));
    const NodeId b = g.sum(g.exp(g.scale(shared, 0.3)));
    const Block ga = *g.backward(a).find(w);
    const Block gb = *g.backward(b).find(w);
    const Block gab = *g.backward(g.add(a, b)).find(w);
    // Adjoints accumulate in a different order, so agreement is to rounding
    // on the scale of the whole gradient rather than bit-exact.
    const double scale = ga.abs().maxCoeff() + gb.abs().maxCoeff();
    for (Eigen::Index i = 0; i < gab.size(); ++i) {
      EXPECT_NEAR(gab(i), ga(i) + gb(i), 64 * std::numeric_limits<double>::epsilon() * scale);
    }
  }
}

TEST(Backward, DeterministicAcrossRebuilds) {
  auto build = [] {
    Graph g;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    Block wv(4, 2);
    for (Eigen::Index i = 0; i < wv.size(); ++i) wv(i) = normal(rng);
    const NodeId w = g.parameter(wv);
    Block xv(2, 5);
    for (Eigen::Index i = 0; i < xv.size(); ++i) xv(i) = normal(rng);
    const Jet2 x = lift_coordinate(g, xv, 0, 2);
    const Jet2 h = jet_sin(g, jet_matmul(g, w, x));
    const NodeId loss = g.sum(g.mul(h.d1[0], h.d1[0]));
    const GradientMap grads = g.backward(loss);
    return std::pair{g.scalar(loss), Block(*grads.find(w))};
  };
  const auto a = build();
  const auto b = build();
  EXPECT_EQ(a.first, b.first);
  EXPECT_TRUE((a.second == b.second).all());
}

TEST(FiniteDiffCheck, SquareAtOne) {
  const std::vector<double> x0{1.0};
  const std::vector<double> analytic{2.0};
  const auto report = finite_diff_check([](std::span<const double> x) { return x[0] * x[0]; }, x0, 1e-5, analytic);
  EXPECT_NEAR(report.numeric[0], 2.0, 1e-8);
  EXPECT_LT(report.max_rel_err, 1e-8);
  EXPECT_FALSE(report.has_nonfinite);
}

TEST(FiniteDiffCheck, RequiresPositiveStep) {
  const std::vector<double> x0{1.0};
  EXPECT_THROW(finite_diff_check([](std::span<const double> x) { return x[0]; }, x0, 0.0, x0), std::invalid_argument);
}

TEST(FiniteDiffCheck, FlagsInfinities) {
  const std::vector<double> x0{0.0};
  const std::vector<double> analytic{1.0};
  const auto report = finite_diff_check(
      [](std::span<const double> x) { return x[0] > 0 ? std::numeric_limits<double>::infinity() : 0.0; }, x0, 1e-3,
      analytic);
  EXPECT_TRUE(report.has_nonfinite);
}

}  // namespace
