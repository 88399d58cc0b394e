#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "madrom/eval/manifold_gap.hpp"
#include "madrom/eval/metrics.hpp"
#include "madrom/eval/pca.hpp"
#include "madrom/network/network.hpp"

namespace {

using namespace madrom;
using namespace madrom::eval;

std::span<const double> sp(const std::vector<double>& v) { return v; }

TEST(RelativeL2, Examples) {
  const std::vector<double> ref{1.0, -2.0, 3.0, 0.5};
  EXPECT_EQ(relative_l2(ref, ref), 0.0);
  std::vector<double> twice(ref);
  for (double& v : twice) v *= 2;
  EXPECT_DOUBLE_EQ(relative_l2(twice, ref), 1.0);
}

TEST(RelativeL2, UnitBasisPerturbation) {
  // ref = all ones in R^N; pred = ref + e1 * ||ref|| / sqrt(N) gives 1/sqrt(N).
  for (int n : {4, 16, 100}) {
    std::vector<double> ref(static_cast<std::size_t>(n), 1.0);
    std::vector<double> pred(ref);
    pred[0] += 1.0;
    EXPECT_NEAR(relative_l2(pred, ref), 1.0 / std::sqrt(n), 1e-15);
  }
}

TEST(RelativeL2, Errors) {
  const std::vector<double> a{1.0, 2.0}, b{1.0}, zero{0.0, 0.0};
  EXPECT_THROW(relative_l2(a, b), std::invalid_argument);
  EXPECT_THROW(relative_l2(a, zero), std::invalid_argument);
}

TEST(RelativeL2Property, ScaleCovariant) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(20), r(20);
    for (std::size_t i = 0; i < 20; ++i) {
      p[i] = normal(rng);
      r[i] = normal(rng);
    }
    const double alpha = std::exp(normal(rng) * 3) * (trial % 2 ? -1 : 1);
    std::vector<double> ap(p), ar(r);
    for (std::size_t i = 0; i < 20; ++i) {
      ap[i] *= alpha;
      ar[i] *= alpha;
    }
    EXPECT_NEAR(relative_l2(ap, ar), relative_l2(p, r), 1e-13 * relative_l2(p, r));
  }
}

TEST(MeanCi, Examples) {
  const std::vector<double> same{0.3, 0.3, 0.3};
  EXPECT_EQ(mean_and_ci(same).half_width, 0.0);
  const std::vector<double> two{0.0, 1.0};
  EXPECT_EQ(mean_and_ci(two).mean, 0.5);
  // t_{0.975, 1} = 12.7062..., s = 1/sqrt(2), half width = t s / sqrt(2).
  EXPECT_NEAR(mean_and_ci(two).half_width, 12.706204736174707 * 0.5, 1e-9);
  const std::vector<double> one{1.0};
  EXPECT_THROW(mean_and_ci(one), std::invalid_argument);
}

TEST(MeanCiProperty, CoverageIsNominal) {
  std::mt19937_64 rng(2025);
  std::normal_distribution<double> normal(3.0, 2.0);
  int covered = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(5);
    for (double& v : x) v = normal(rng);
    const auto ci = mean_and_ci(x);
    covered += std::abs(ci.mean - 3.0) <= ci.half_width;
  }
  // Binomial standard error at p = 0.95 over 10^4 trials is about 0.0022.
  EXPECT_NEAR(covered / static_cast<double>(trials), 0.95, 0.01);
}

TEST(ErrorReport, MeanMatchesStoredErrors) {
  const auto r = ErrorReport::from({"a", "b", "c", "d"}, {0.1, 0.4, 0.25, 0.05});
  double sum = 0.0;
  for (double e : r.errors) sum += e;
  EXPECT_DOUBLE_EQ(r.mean, sum / static_cast<double>(r.errors.size()));
  EXPECT_GT(r.half_width, 0.0);
  EXPECT_THROW(ErrorReport::from({"a"}, {0.1, 0.2}), std::invalid_argument);
  EXPECT_THROW(ErrorReport::from({"a", "b"}, {0.1, -0.2}), std::invalid_argument);
}

train::RunTrace trace_of(const std::vector<std::optional<double>>& errors) {
  train::RunTrace t;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    t.rows.push_back(train::TraceRow{static_cast<std::int64_t>(i * 10), 1.0, errors[i], 1e-3, 0.0, "x"});
  }
  return t;
}

TEST(IterationsToThreshold, Examples) {
  EXPECT_EQ(iterations_to_threshold(trace_of({0.01, 0.5}), 0.1), 0);
  EXPECT_EQ(iterations_to_threshold(trace_of({0.9, std::nullopt, 0.3, 0.08, 0.01}), 0.1), 30);
  EXPECT_EQ(iterations_to_threshold(trace_of({0.9, 0.5}), 0.1), std::nullopt);
  EXPECT_THROW(iterations_to_threshold(trace_of({0.9}), 0.0), std::invalid_argument);
}

TEST(MedianIterations, MissingCountsAsInfinite) {
  const std::vector<std::optional<std::int64_t>> v{10, std::nullopt, 30, 20, std::nullopt};
  EXPECT_EQ(median_iterations(v), 30.0);
  const std::vector<std::optional<std::int64_t>> w{std::nullopt, std::nullopt, 5};
  EXPECT_TRUE(std::isinf(median_iterations(w)));
}

TEST(Pca, CollinearSamplesHaveNoSecondComponent) {
  Eigen::MatrixXd s(5, 4);
  const Eigen::RowVector4d dir(1, 2, -1, 0.5);
  for (int i = 0; i < 5; ++i) s.row(i) = (i - 2.0) * dir + Eigen::RowVector4d(3, 3, 3, 3);
  const auto p = pca_project(s);
  EXPECT_LT(p.coords.col(1).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(p.rank_deficient);
}

TEST(Pca, PlanarDataKeepsPairwiseDistances) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd basis(2, 6);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis(i) = normal(rng);
  Eigen::MatrixXd coeff(8, 2);
  for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff(i) = normal(rng);
  const Eigen::MatrixXd s = coeff * basis;
  const auto p = pca_project(s);
  EXPECT_FALSE(p.rank_deficient);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      EXPECT_NEAR((p.coords.row(i) - p.coords.row(j)).norm(), (s.row(i) - s.row(j)).norm(), 1e-10);
    }
  }
}

TEST(Pca, ReconstructionErrorEqualsTrailingEigenvalues) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd s(12, 7);
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = normal(rng);
  const auto p = pca_project(s);
  const Eigen::MatrixXd centered = s.rowwise() - p.mean.transpose();
  const Eigen::MatrixXd recon = p.coords * p.components.transpose();
  const double err = (centered - recon).squaredNorm() / static_cast<double>(s.rows() - 1);
  const double trailing = p.eigenvalues.tail(p.eigenvalues.size() - 2).sum();
  EXPECT_NEAR(err, trailing, 1e-10 * (1 + trailing));
  EXPECT_NEAR(p.explained.sum() + trailing / p.eigenvalues.sum(), 1.0, 1e-12);
}

TEST(PcaProperty, DeterministicWithSignConvention) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd s(6, 5);
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = normal(rng);
  const auto a = pca_project(s);
  const auto b = pca_project(s);
  EXPECT_EQ(a.coords, b.coords);
  for (int c = 0; c < 2; ++c) {
    for (Eigen::Index r = 0; r < a.components.rows(); ++r) {
      if (a.components(r, c) != 0.0) {
        EXPECT_GT(a.components(r, c), 0.0);
        break;
      }
    }
  }
  EXPECT_THROW(pca_project(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

net::NetworkWeights gap_net(int n) {
  net::NetworkConfig c;
  c.depth = 3;
  c.width = 16;
  c.latent_dim = n;
  return net::init_weights(c, 12);
}

Eigen::ArrayXXd gap_grid() { return Eigen::ArrayXXd(Eigen::ArrayXd::LinSpaced(64, -3, 3).transpose()); }

TEST(ManifoldGap, RealizableTargetIsRecovered) {
  const auto w = gap_net(2);
  Eigen::VectorXd z0(2);
  z0 << 0.5, -0.4;
  const Eigen::ArrayXd target = net::forward(w, gap_grid(), z0).row(0).transpose();
  const auto r = empirical_manifold_gap(w, gap_grid(), target);
  EXPECT_LE(r.gap, 1e-3);
  EXPECT_LE(r.latent.norm(), 1.0 + 1e-12);
}

TEST(ManifoldGap, NoLatentIsDirectError) {
  const auto w = gap_net(0);
  const Eigen::ArrayXd target = gap_grid().row(0).transpose().sin() + 2.0;
  const Eigen::ArrayXd pred = net::forward(w, gap_grid(), Eigen::VectorXd()).row(0).transpose();
  const auto r = empirical_manifold_gap(w, gap_grid(), target);
  EXPECT_EQ(r.gap, relative_l2(std::span<const double>(pred.data(), 64), std::span<const double>(target.data(), 64)));
  EXPECT_TRUE(r.history.empty());
}

TEST(ManifoldGapProperty, BallConstraintAndBudgetMonotonicity) {
  const auto w = gap_net(3);
  Eigen::VectorXd z0(3);
  z0 << 3.0, -2.0, 1.0;  // outside the ball, so the constraint is active
  const Eigen::ArrayXd target = net::forward(w, gap_grid(), z0).row(0).transpose();
  GapOptions o;
  o.iterations = 300;
  const auto a = empirical_manifold_gap(w, gap_grid(), target, o);
  o.iterations = 600;
  const auto b = empirical_manifold_gap(w, gap_grid(), target, o);
  EXPECT_LE(a.latent.norm(), 1.0 + 1e-12);
  EXPECT_LE(b.latent.norm(), 1.0 + 1e-12);
  EXPECT_LE(b.gap, a.gap);
  for (std::size_t i = 1; i < b.history.size(); ++i) EXPECT_LE(b.history[i], b.history[i - 1]);
}

}  // namespace
