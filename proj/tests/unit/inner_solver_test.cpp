#include "ricl/inner_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ricl/datagen.hpp"
#include "ricl/error.hpp"
#include "ricl/softmax_regression.hpp"
#include "test_util.hpp"

namespace ricl {
namespace {

using testing::vec_of;

std::vector<Example> random_prefix(Eigen::Index m, Eigen::Index n, Eigen::Index d,
                                   RngStream& rng) {
  std::vector<Example> ex;
  for (Eigen::Index i = 0; i < m; ++i) {
    Vector b = gauss_vector(n, rng);
    b *= 0.8 / b.norm();
    ex.push_back({gauss_matrix(n, d, rng), b});
  }
  return ex;
}

TEST(SolveWeightedSoftmax, OptimalInitIsReturnedUnchanged) {
  RngStream rng(1, 0);
  const Matrix a = gauss_matrix(4, 4, rng);
  const Vector x0 = gauss_vector(4, rng);
  InnerConfig cfg;
  cfg.init = x0;
  const auto res = solve_weighted_softmax({{a, softmax_predict(a, x0)}}, vec_of({1}), cfg);
  EXPECT_EQ(res.x_star, x0);
  EXPECT_EQ(res.final_grad_norm, 0.0);
  EXPECT_EQ(res.steps_taken, 0u);
}

TEST(SolveWeightedSoftmax, ZeroWeightsReturnInit) {
  RngStream rng(2, 0);
  const auto ex = random_prefix(3, 2, 2, rng);
  InnerConfig cfg;
  cfg.init = vec_of({0.3, -0.7});
  const auto res = solve_weighted_softmax(ex, Vector::Zero(3), cfg);
  EXPECT_EQ(res.x_star, *cfg.init);
  EXPECT_EQ(res.steps_taken, 0u);
  EXPECT_EQ(res.final_loss, 0.0);
}

TEST(SolveWeightedSoftmax, FixedStepDescendsToGridOptimum) {
  RngStream rng(3, 0);
  const auto ex = random_prefix(3, 2, 2, rng);
  const Vector w = Vector::Ones(3);
  const double radius = 5.0;
  InnerConfig cfg;
  cfg.line_search = false;
  cfg.step_size = 0.5;
  cfg.max_steps = 200000;
  cfg.grad_tol = 1e-8;
  cfg.project_radius = radius;
  const auto res = solve_weighted_softmax(ex, w, cfg);
  EXPECT_LE(res.final_loss, res.loss_trace.front());
  EXPECT_LE(res.final_grad_norm, cfg.grad_tol);
  for (std::size_t k = 1; k < res.loss_trace.size(); ++k) {
    ASSERT_LE(res.loss_trace[k], res.loss_trace[k - 1] + 1e-15);
  }

  // 41 x 41 grid over the disc: the solver must do at least as well as the
  // best grid point.
  double grid_best = INFINITY;
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const Vector x = vec_of({-radius + i * radius / 20.0, -radius + j * radius / 20.0});
      if (x.norm() > radius) continue;
      grid_best = std::min(grid_best, weighted_softmax_objective(ex, w, x));
    }
  }
  EXPECT_LE(res.final_loss, grid_best + 1e-12);
}

TEST(SolveWeightedSoftmax, LineSearchMatchesFixedStepOptimum) {
  RngStream rng(4, 0);
  const auto ex = random_prefix(5, 3, 3, rng);
  const Vector w = Vector::Ones(5);
  InnerConfig slow;
  slow.line_search = false;
  slow.step_size = 0.5;
  slow.max_steps = 500000;
  slow.grad_tol = 1e-10;
  slow.project_radius = 4.0;
  InnerConfig fast = slow;
  fast.line_search = true;
  fast.step_size = 1.0;
  fast.max_steps = 5000;
  const auto a = solve_weighted_softmax(ex, w, slow);
  const auto b = solve_weighted_softmax(ex, w, fast);
  EXPECT_NEAR(a.final_loss, b.final_loss, 1e-12);
  EXPECT_LT(b.steps_taken, a.steps_taken);
}

TEST(SolveWeightedSoftmax, GradientBelowTolWhenStoppedEarly) {
  RngStream rng(5, 0);
  InnerConfig cfg;
  cfg.max_steps = 5000;
  for (int t = 0; t < 20; ++t) {
    const auto ex = random_prefix(4, 3, 3, rng);
    Vector w(4);
    for (auto& v : w) v = 0.5 + rng.uniform();
    const auto res = solve_weighted_softmax(ex, w, cfg);
    if (res.steps_taken < cfg.max_steps) {
      Vector g;
      weighted_softmax_objective(ex, w, res.x_star, &g);
      ASSERT_LE(g.norm(), cfg.grad_tol);
    }
  }
}

TEST(SolveWeightedSoftmax, ProjectionKeepsIterateInBall) {
  RngStream rng(6, 0);
  auto task = gen_task(4, 4, 10, rng);
  const auto ex = gen_examples(PrefixKind::noisy(1.0), task, rng);
  InnerConfig cfg;
  cfg.project_radius = 1.5;
  const auto res = solve_weighted_softmax(ex, Vector::Ones(10), cfg);
  EXPECT_LE(res.x_star.norm(), 1.5 + 1e-12);
  EXPECT_LE(res.final_grad_norm, cfg.grad_tol);
}

TEST(SolveWeightedSoftmax, WeightScalingLeavesArgminUnchanged) {
  RngStream rng(7, 0);
  InnerConfig cfg;
  cfg.max_steps = 5000;
  cfg.grad_tol = 1e-12;
  auto task = gen_task(4, 4, 6, rng);
  const auto ex = gen_examples(PrefixKind::noisy(0.05), task, rng);
  const Vector w = vec_of({1, 0.5, 2, 1, 1.5, 0.7});
  const auto x1 = solve_weighted_softmax(ex, w, cfg).x_star;
  const auto x2 = solve_weighted_softmax(ex, 3.0 * w, cfg).x_star;
  const double l11 = weighted_softmax_objective(ex, w, x1);
  const double l12 = weighted_softmax_objective(ex, w, x2);
  EXPECT_LE(std::abs(l11 - l12), 1e-6 * l11);
}

TEST(SolveWeightedSoftmax, ShapeErrors) {
  RngStream rng(8, 0);
  const auto ex = random_prefix(2, 3, 3, rng);
  EXPECT_THROW(solve_weighted_softmax(ex, Vector::Ones(3), {}), Error);
  auto bad = ex;
  bad[1].a = Matrix::Zero(3, 2);
  EXPECT_THROW(solve_weighted_softmax(bad, Vector::Ones(2), {}), Error);
  InnerConfig cfg;
  cfg.init = Vector::Zero(2);
  EXPECT_THROW(solve_weighted_softmax(ex, Vector::Ones(2), cfg), Error);
}

TEST(IclPredict, ZeroQueryIsUniform) {
  const Vector f = icl_predict(Matrix::Zero(4, 2), vec_of({3, -1}));
  EXPECT_EQ(f, Vector::Constant(4, 0.25));
}

TEST(IclPredict, SameAsSoftmaxPredict) {
  RngStream rng(10, 0);
  const Matrix a = gauss_matrix(3, 3, rng);
  const Vector x = gauss_vector(3, rng);
  EXPECT_EQ(icl_predict(a, x), softmax_predict(a, x));
}

TEST(IclPredict, CleanPrefixRecoversTask) {
  RngStream rng(11, 0);
  const auto task = gen_task(8, 8, 5, rng);
  const auto ex = gen_examples(PrefixKind::random(), task, rng);
  InnerConfig cfg;
  cfg.max_steps = 50000;
  const Vector x = solve_weighted_softmax(ex, Vector::Ones(5), cfg).x_star;
  for (int t = 0; t < 20; ++t) {
    const Matrix q = gauss_matrix(8, 8, rng);
    EXPECT_LE((icl_predict(q, x) - softmax_predict(q, task.x_true)).norm(), 1e-5);
  }
}

TEST(SolveWeightedLinear, RecoversExactSolution) {
  RngStream rng(12, 0);
  const Matrix a = gauss_matrix(4, 4, rng);
  const Vector x_true = gauss_vector(4, rng);
  const Vector x = solve_weighted_linear({{a, a * x_true}}, Vector::Ones(5));
  EXPECT_LE((x - x_true).norm(), 1e-10);
}

TEST(SolveWeightedLinear, ZeroRowWeightsAreSingular) {
  RngStream rng(13, 0);
  const auto ex = random_prefix(2, 3, 3, rng);
  Vector w = Vector::Ones(8);
  w.segment(0, 3).setZero();
  w.segment(4, 3).setZero();
  try {
    solve_weighted_linear(ex, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingularSystem);
  }
  // The fallback ridge is also zero here, so the error stands.
  EXPECT_THROW(solve_weighted_linear(ex, w, 0.0, true), Error);
}

TEST(SolveWeightedLinear, FallbackRidgeHandlesRankDeficiency) {
  RngStream rng(14, 0);
  auto ex = random_prefix(1, 3, 3, rng);
  ex[0].a.col(2) = ex[0].a.col(1);
  const Vector x = solve_weighted_linear(ex, Vector::Ones(4), 0.0, true);
  EXPECT_TRUE(x.allFinite());
}

TEST(SolveWeightedLinear, SplitBiasWeightsAreEquivalent) {
  RngStream rng(15, 0);
  const Matrix a = gauss_matrix(3, 3, rng);
  const Vector b = gauss_vector(3, rng);
  const std::vector<Example> twins{{a, b}, {a, b}};
  Vector w1 = Vector::Ones(8), w2 = Vector::Ones(8);
  w1(3) = 2.0;
  w1(7) = 0.0;
  const Vector x1 = solve_weighted_linear(twins, w1), x2 = solve_weighted_linear(twins, w2);
  EXPECT_LE((x1 - x2).norm(), 1e-12 * x1.norm());
}

TEST(SolveWeightedLinear, ConsistentDataHasZeroResidual) {
  RngStream rng(16, 0);
  const Vector x_true = gauss_vector(3, rng);
  std::vector<Example> ex;
  for (int i = 0; i < 3; ++i) {
    Matrix a = gauss_matrix(5, 3, rng);
    Vector b = a * x_true;
    ex.push_back({a, b});
  }
  // Row and bias weights equal per example keep the aggregate consistent.
  Vector w(18);
  for (int i = 0; i < 3; ++i) w.segment(6 * i, 6).setConstant(0.5 + rng.uniform());
  const auto [agg_a, agg_b] = weighted_linear_aggregate(ex, w);
  EXPECT_LE((agg_a * solve_weighted_linear(ex, w) - agg_b).norm(), 1e-9);
}

TEST(WeightedLinearAggregate, AveragesScaledBlocks) {
  const Matrix a1 = Matrix::Identity(2, 2), a2 = 2.0 * Matrix::Identity(2, 2);
  const std::vector<Example> ex{{a1, vec_of({1, 0})}, {a2, vec_of({0, 1})}};
  const auto [a, b] = weighted_linear_aggregate(ex, vec_of({1, 3, 2, 1, 1, 4}));
  EXPECT_EQ(a, Matrix(testing::from_rows({{1.5, 0.0}, {0.0, 2.5}})));
  EXPECT_EQ(b, vec_of({1.0, 2.0}));
}

}  // namespace
}  // namespace ricl
