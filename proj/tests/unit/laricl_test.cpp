#include "ricl/laricl.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ricl/error.hpp"
#include "test_util.hpp"

namespace ricl {
namespace {

struct LinearTask {
  Vector x_true;
  std::vector<Example> prefix;
  std::vector<Example> valset;
};

LinearTask linear_consistent(Eigen::Index m, Eigen::Index n, Eigen::Index d, std::size_t v,
                             RngStream& rng) {
  LinearTask t;
  t.x_true = gauss_vector(d, rng);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Matrix a = gauss_matrix(n, d, rng);
    t.prefix.push_back({a, a * t.x_true});
  }
  for (std::size_t i = 0; i < v; ++i) {
    const Matrix a = gauss_matrix(n, d, rng);
    t.valset.push_back({a, a * t.x_true});
  }
  return t;
}

std::vector<Example> random_set(Eigen::Index m, Eigen::Index n, Eigen::Index d, RngStream& rng) {
  std::vector<Example> out;
  for (Eigen::Index i = 0; i < m; ++i) out.push_back({gauss_matrix(n, d, rng), gauss_vector(n, rng)});
  return out;
}

TEST(LariclValLoss, ConsistentDataIsExact) {
  RngStream rng(1, 0);
  const auto t = linear_consistent(20, 8, 8, 50, rng);
  EXPECT_LE(laricl_val_loss(Vector::Ones(20 * 9), t.prefix, t.valset), 1e-18);
}

TEST(LariclValLoss, ValsetOnTheFittedSolutionIsZero) {
  RngStream rng(2, 0);
  const auto prefix = random_set(3, 3, 3, rng);
  const Vector w = Vector::Ones(12) + 0.3 * gauss_vector(12, rng);
  const Vector x = solve_weighted_linear(prefix, w);
  std::vector<Example> val;
  for (int i = 0; i < 5; ++i) {
    const Matrix a = gauss_matrix(3, 3, rng);
    val.push_back({a, a * x});
  }
  EXPECT_LE(laricl_val_loss(w, prefix, val), 1e-20);
}

TEST(LariclValLoss, ScaleInvariant) {
  RngStream rng(3, 0);
  const auto prefix = random_set(3, 4, 3, rng);
  const auto val = random_set(4, 4, 3, rng);
  const Vector w = Vector::Ones(15) + 0.3 * gauss_vector(15, rng);
  const double base = laricl_val_loss(w, prefix, val);
  for (const double lambda : {0.1, 3.0, 250.0}) {
    EXPECT_NEAR(laricl_val_loss(lambda * w, prefix, val), base, 1e-10 * base);
  }
}

TEST(LariclValLoss, SingularWithoutRidgeAndRecoveredWithFallback) {
  RngStream rng(4, 0);
  const auto prefix = random_set(2, 3, 3, rng);
  const auto val = random_set(2, 3, 3, rng);
  try {
    laricl_val_loss(Vector::Zero(8), prefix, val);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingularSystem);
  }
  Vector w = Vector::Ones(8);
  w.head(3).setZero();
  w.segment(4, 3).setZero();
  EXPECT_THROW(laricl_val_loss(w, prefix, val), Error);
  EXPECT_TRUE(std::isfinite(laricl_val_loss(w, prefix, val, {0.1, false})));
}

TEST(LariclGrad, ZeroAtGlobalMinimum) {
  RngStream rng(5, 0);
  const auto t = linear_consistent(4, 3, 3, 10, rng);
  // Equal row and bias weights per example keep the aggregate consistent.
  Vector w(16);
  for (int i = 0; i < 4; ++i) w.segment(4 * i, 4).setConstant(0.5 + rng.uniform());
  EXPECT_LE(laricl_val_loss(w, t.prefix, t.valset), 1e-18);
  EXPECT_LE(laricl_grad(w, t.prefix, t.valset).norm(), 1e-9);
}

TEST(LariclGrad, OrthogonalToAllOnesDirection) {
  RngStream rng(6, 0);
  const auto prefix = random_set(3, 3, 3, rng);
  const auto val = random_set(5, 3, 3, rng);
  const Vector ones = Vector::Ones(12);
  const Vector g = laricl_grad(ones, prefix, val);
  EXPECT_LE(std::abs(g.dot(ones)), 1e-10 * g.norm() * ones.norm());
}

TEST(LariclGrad, MatchesFiniteDifferences) {
  RngStream rng(7, 0);
  for (int t = 0; t < 100; ++t) {
    const auto n = 1 + static_cast<Eigen::Index>(rng.uniform() * 4);
    const auto d = 1 + static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n));
    const auto m = 1 + static_cast<Eigen::Index>(rng.uniform() * 3);
    const auto prefix = random_set(m, std::max(n, d), d, rng);
    const auto val = random_set(2, std::max(n, d), d, rng);
    const Vector w = Vector::Ones(weight_length(prefix)) +
                     0.2 * gauss_vector(weight_length(prefix), rng);
    const Vector a = laricl_grad(w, prefix, val, AnalyticGradient{});
    const Vector f = laricl_grad(w, prefix, val, CentralDifference{1e-5});
    ASSERT_LE(testing::relative_error(a, f), 1e-6) << "instance " << t;
  }
}

TEST(LariclGrad, RidgeGradientMatchesFiniteDifferences) {
  RngStream rng(8, 0);
  const auto prefix = random_set(2, 3, 3, rng);
  const auto val = random_set(3, 3, 3, rng);
  const Vector w = Vector::Ones(8) + 0.3 * gauss_vector(8, rng);
  const LinearRidge ridge{0.5, false};
  EXPECT_LE(testing::relative_error(laricl_grad(w, prefix, val, AnalyticGradient{}, ridge),
                                    laricl_grad(w, prefix, val, CentralDifference{1e-5}, ridge)),
            1e-6);
}

TEST(LariclTrain, ZeroStepsKeepsOnes) {
  RngStream rng(9, 0);
  const auto prefix = random_set(3, 3, 3, rng);
  const auto val = random_set(3, 3, 3, rng);
  LariclConfig cfg;
  cfg.outer_steps = 0;
  const auto res = laricl_train(prefix, val, cfg);
  EXPECT_EQ(res.w, Vector::Ones(12));
  EXPECT_EQ(res.trace.size(), 1u);
}

TEST(LariclTrain, ConsistentDataStaysAtFloorAndRecoversTruth) {
  RngStream rng(10, 0);
  const auto t = linear_consistent(6, 4, 4, 20, rng);
  LariclConfig cfg;
  cfg.outer_steps = 20;
  cfg.backtracking = true;
  const auto res = laricl_train(t.prefix, t.valset, cfg);
  for (const auto& r : res.trace) EXPECT_LE(r.l_valid, res.trace.front().l_valid + 1e-18);
  EXPECT_LE((res.x - t.x_true).norm(), 1e-9 * (1.0 + t.x_true.norm()));
}

TEST(LariclTrain, CorruptedExampleLosesBiasWeight) {
  // Identity inputs make the aggregate diagonal, so x = (w_b1 b1 + w_b2 b2) / (w_a1 + w_a2)
  // row by row and every minimizer has w_b2 = 0.
  const Vector x_true = testing::vec_of({0.3, -0.2});
  const Vector delta = testing::vec_of({4.0, -3.0});
  const Matrix eye = Matrix::Identity(2, 2);
  const std::vector<Example> prefix{{eye, x_true}, {eye, x_true + delta}};
  RngStream rng(11, 0);
  std::vector<Example> val;
  for (int i = 0; i < 20; ++i) {
    const Matrix a = gauss_matrix(2, 2, rng);
    val.push_back({a, a * x_true});
  }
  LariclConfig cfg;
  cfg.outer_steps = 100;
  cfg.backtracking = true;
  const auto res = laricl_train(prefix, val, cfg);
  EXPECT_LT(std::abs(res.w(5)), 1.0);
  EXPECT_LT(res.trace.back().l_valid, res.trace.front().l_valid);
}

TEST(LariclTrain, BacktrackingIsMonotone) {
  RngStream rng(12, 0);
  const auto prefix = random_set(4, 3, 3, rng);
  const auto val = random_set(10, 3, 3, rng);
  LariclConfig cfg;
  cfg.outer_steps = 40;
  cfg.outer_lr = 10.0;
  cfg.backtracking = true;
  const auto trace = laricl_train(prefix, val, cfg).trace;
  for (std::size_t t = 0; t + 1 < trace.size(); ++t) {
    ASSERT_LE(trace[t + 1].l_valid, trace[t].l_valid + 1e-12);
  }
}

TEST(LariclTrain, RejectsBadConfig) {
  RngStream rng(13, 0);
  const auto prefix = random_set(2, 3, 3, rng);
  LariclConfig cfg;
  cfg.outer_lr = -1.0;
  EXPECT_THROW(laricl_train(prefix, prefix, cfg), Error);
  cfg.outer_lr = 1.0;
  cfg.ridge = -1.0;
  EXPECT_THROW(laricl_train(prefix, prefix, cfg), Error);
}

}  // namespace
}  // namespace ricl
