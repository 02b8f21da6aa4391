#include "ricl/ricl.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "ricl/datagen.hpp"
#include "ricl/error.hpp"
#include "ricl/softmax_regression.hpp"
#include "test_util.hpp"

namespace ricl {
namespace {

std::vector<Example> random_examples(Eigen::Index m, Eigen::Index n, Eigen::Index d,
                                     RngStream& rng) {
  std::vector<Example> ex;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Matrix a = gauss_matrix(n, d, rng);
    ex.push_back({a, softmax_predict(a, gauss_vector(d, rng)) + 0.2 * gauss_vector(n, rng)});
  }
  return ex;
}

Vector flatten(const ReweightParams& p) {
  Vector out(p.w.size() + p.b.size());
  out << p.w, vec(p.b);
  return out;
}

TEST(RiclTrain, ZeroStepsReturnsInitialization) {
  RngStream rng(1, 0);
  const auto ex = random_examples(3, 3, 3, rng);
  const auto val = random_examples(4, 3, 3, rng);
  RiclConfig cfg;
  cfg.outer_steps = 0;
  const auto res = ricl_train(ex, val, cfg);
  EXPECT_EQ(res.params.w, Vector::Ones(3));
  ASSERT_EQ(res.trace.size(), 1u);
  EXPECT_EQ(res.trace[0].step, 0u);
  EXPECT_EQ(res.trace[0].step_size, 0.0);
  EXPECT_DOUBLE_EQ(res.trace[0].l_valid, validation_loss(Vector::Ones(3), ex, val, cfg.inner));
}

TEST(RiclTrain, TransformerInitIsSeededGaussianWithZeroBias) {
  RngStream rng(2, 0);
  const auto ex = random_examples(2, 3, 3, rng);
  RiclConfig cfg;
  cfg.mode = RiclMode::kTransformer;
  cfg.seed = 9;
  const auto p = ricl_initial_params(ex, cfg);
  EXPECT_EQ(p.w.size(), 8);
  EXPECT_EQ(p.b, Matrix::Zero(8, 3));
  EXPECT_EQ(p.w, ricl_initial_params(ex, cfg).w);
  cfg.seed = 10;
  EXPECT_NE(p.w, ricl_initial_params(ex, cfg).w);
}

TEST(RiclTrain, TraceHasOneRecordPerStepPlusFinal) {
  RngStream rng(3, 0);
  const auto ex = random_examples(3, 3, 3, rng);
  const auto val = random_examples(6, 3, 3, rng);
  RiclConfig cfg;
  cfg.outer_steps = 5;
  cfg.outer_lr = 0.1;
  const auto res = ricl_train(ex, val, cfg);
  ASSERT_EQ(res.trace.size(), 6u);
  for (std::size_t t = 0; t < res.trace.size(); ++t) {
    EXPECT_EQ(res.trace[t].step, t);
    EXPECT_TRUE(std::isfinite(res.trace[t].l_valid));
  }
  EXPECT_DOUBLE_EQ(res.trace.back().l_valid, validation_loss(res.params.w, ex, val, cfg.inner));
}

TEST(RiclTrain, MonotoneDescentWithBacktracking) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto ds = gen_dataset(seed, PrefixKind::noisy(0.5), 4, 4, 8, 40, 10);
    RiclConfig cfg;
    cfg.outer_steps = 50;
    cfg.backtracking = true;
    cfg.inner.project_radius = 4.0;
    const auto trace = ricl_train(ds.prefix, ds.validation, cfg).trace;
    for (std::size_t t = 0; t + 1 < trace.size(); ++t) {
      ASSERT_LE(trace[t + 1].l_valid, trace[t].l_valid + 1e-12) << "seed " << seed << " t " << t;
    }
    EXPECT_LT(trace.back().l_valid, trace.front().l_valid);
  }
}

TEST(RiclTrain, NonNegativeProjectionKeepsWeightsNonNegative) {
  const auto ds = gen_dataset(4, PrefixKind::noisy(1.0), 4, 4, 8, 40, 10);
  RiclConfig cfg;
  cfg.outer_steps = 30;
  cfg.outer_lr = 50.0;
  cfg.weight_projection = WeightProjection::kNonNegative;
  cfg.inner.project_radius = 4.0;
  const auto res = ricl_train(ds.prefix, ds.validation, cfg);
  EXPECT_GE(res.params.w.minCoeff(), 0.0);
}

TEST(RiclTrain, DivergenceIsReported) {
  RngStream rng(5, 0);
  const auto ex = random_examples(3, 3, 3, rng);
  const auto val = random_examples(4, 3, 3, rng);
  RiclConfig cfg;
  cfg.outer_steps = 3;
  cfg.outer_lr = std::numeric_limits<double>::infinity();
  cfg.inner.line_search = false;
  cfg.inner.max_steps = 5;
  try {
    ricl_train(ex, val, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDivergenceDetected);
  }
}

TEST(RiclTrain, RejectsBadConfig) {
  RngStream rng(6, 0);
  const auto ex = random_examples(2, 3, 3, rng);
  const auto val = random_examples(2, 3, 3, rng);
  RiclConfig cfg;
  cfg.batch_size = 3;
  EXPECT_THROW(ricl_train(ex, val, cfg), Error);
  cfg.batch_size = 0;
  cfg.outer_lr = 0.0;
  EXPECT_THROW(ricl_train(ex, val, cfg), Error);
  cfg.outer_lr = 1.0;
  cfg.mode = RiclMode::kTransformer;
  EXPECT_THROW(ricl_train(random_examples(2, 3, 2, rng), val, cfg), Error);
}

TEST(RiclTrain, MinibatchRunIsDeterministic) {
  const auto ds = gen_dataset(7, PrefixKind::noisy(0.8), 4, 4, 6, 30, 10);
  RiclConfig cfg;
  cfg.outer_steps = 12;
  cfg.batch_size = 7;
  cfg.outer_lr = 0.5;
  cfg.seed = 3;
  const auto a = ricl_train(ds.prefix, ds.validation, cfg);
  const auto b = ricl_train(ds.prefix, ds.validation, cfg);
  EXPECT_EQ(a.params.w, b.params.w);
}

TEST(RiclTrain, TransformerModeRunsAndStaysFinite) {
  const auto ds = gen_dataset(8, PrefixKind::noisy(0.5), 3, 3, 4, 20, 10);
  RiclConfig cfg;
  cfg.mode = RiclMode::kTransformer;
  cfg.init = WeightInit::kOnes;
  cfg.gamma = 0.1;
  cfg.outer_steps = 10;
  cfg.backtracking = true;
  cfg.inner.project_radius = 4.0;
  const auto res = ricl_train(ds.prefix, ds.validation, cfg);
  EXPECT_EQ(res.params.b.rows(), 16);
  for (std::size_t t = 0; t + 1 < res.trace.size(); ++t) {
    EXPECT_LE(res.trace[t + 1].l_valid, res.trace[t].l_valid + 1e-12);
  }
}

TEST(ValidationLoss, DuplicatedValsetDoubles) {
  RngStream rng(10, 0);
  const auto ex = random_examples(3, 3, 3, rng);
  auto val = random_examples(5, 3, 3, rng);
  const double once = validation_loss(Vector::Ones(3), ex, val, {});
  auto twice = val;
  twice.insert(twice.end(), val.begin(), val.end());
  EXPECT_NEAR(validation_loss(Vector::Ones(3), ex, twice, {}), 2.0 * once, 1e-13 * once);
}

TEST(ValidationLoss, ZeroWeightsEvaluateAtZero) {
  RngStream rng(11, 0);
  const auto ex = random_examples(3, 3, 3, rng);
  const auto val = random_examples(5, 3, 3, rng);
  EXPECT_DOUBLE_EQ(validation_loss(Vector::Zero(3), ex, val, {}), sum_loss(val, Vector::Zero(3)));
}

TEST(ValidationLoss, UniformWeightsNearOracleOnCleanTask) {
  const auto p = preset("ci");
  const auto ds = gen_dataset(1, PrefixKind::random(), p);
  InnerConfig inner;
  inner.project_radius = p.radius;
  const double uniform = validation_loss(Vector::Ones(p.m), ds.prefix, ds.validation, inner);
  const Vector x_oracle =
      solve_weighted_softmax(ds.validation, Vector::Ones(static_cast<Eigen::Index>(
                                                ds.validation.size())), inner).x_star;
  const double oracle = sum_loss(ds.validation, x_oracle);
  // Both are at the floor of the solver tolerance on clean data.
  EXPECT_LE(uniform, 1.1 * oracle + 1e-10);
}

TEST(ValidationLoss, RejectsEmptyValset) {
  RngStream rng(12, 0);
  EXPECT_THROW(validation_loss(Vector::Ones(2), random_examples(2, 3, 3, rng), {}, {}), Error);
}

TEST(MetaGradient, ZeroEtaGivesZero) {
  RngStream rng(20, 0);
  const auto ex = random_examples(3, 3, 3, rng);
  const auto batch = random_examples(4, 3, 3, rng);
  const auto g = meta_gradient(RiclMode::kScalar, {Vector::Ones(3), Matrix()},
                               gauss_vector(3, rng), ex, batch, OneStepLookahead{0.0});
  EXPECT_EQ(g.w, Vector::Zero(3));
}

TEST(MetaGradient, ZeroBatchGradientGivesZero) {
  RngStream rng(21, 0);
  const Matrix a = gauss_matrix(3, 3, rng);
  const Vector x = gauss_vector(3, rng);
  // Prefix and batch share the fixed point, so x+ = x and the batch gradient vanishes.
  const std::vector<Example> ex{{a, softmax_predict(a, x)}};
  const auto g = meta_gradient(RiclMode::kScalar, {Vector::Ones(1), Matrix()}, x, ex, ex,
                               OneStepLookahead{1.0});
  EXPECT_LE(g.w.norm(), 1e-15);
}

TEST(MetaGradient, OneStepLookaheadMatchesClosedForm) {
  RngStream rng(22, 0);
  const auto ex = random_examples(2, 2, 2, rng);
  const auto batch = random_examples(2, 2, 2, rng);
  const Vector x = gauss_vector(2, rng);
  const Vector w = testing::vec_of({0.7, 1.3});
  const double eta = 0.4;
  Vector x_plus = x;
  for (int i = 0; i < 2; ++i) x_plus -= eta * w(i) * sr_gradient(ex[i].a, ex[i].b, x);
  const Vector gb = sum_gradient(batch, x_plus);
  Vector expected(2);
  for (int i = 0; i < 2; ++i) expected(i) = -eta * gb.dot(sr_gradient(ex[i].a, ex[i].b, x));
  const auto g =
      meta_gradient(RiclMode::kScalar, {w, Matrix()}, x, ex, batch, OneStepLookahead{eta});
  EXPECT_LE(testing::relative_error(g.w, expected), 1e-14);
}

TEST(MetaGradient, OneStepLookaheadMatchesFiniteDifferences) {
  RngStream rng(23, 0);
  for (int t = 0; t < 20; ++t) {
    const auto ex = random_examples(2, 2, 2, rng);
    const auto batch = random_examples(2, 2, 2, rng);
    const Vector x = gauss_vector(2, rng);
    const ReweightParams p{Vector::Ones(2) + 0.5 * gauss_vector(2, rng), Matrix()};
    const auto a = meta_gradient(RiclMode::kScalar, p, x, ex, batch, OneStepLookahead{1.0});
    const auto f = meta_gradient(RiclMode::kScalar, p, x, ex, batch, FiniteDifference{1e-5, 1, 1.0});
    ASSERT_LE(testing::relative_error(a.w, f.w), 1e-6);
  }
}

TEST(MetaGradient, UnrolledOneEqualsOneStepLookahead) {
  RngStream rng(24, 0);
  const auto ex = random_examples(3, 3, 3, rng);
  const auto batch = random_examples(3, 3, 3, rng);
  const Vector x = gauss_vector(3, rng);
  const ReweightParams p{gauss_vector(3, rng), Matrix()};
  EXPECT_EQ(meta_gradient(RiclMode::kScalar, p, x, ex, batch, Unrolled{1, 0.3}).w,
            meta_gradient(RiclMode::kScalar, p, x, ex, batch, OneStepLookahead{0.3}).w);
}

TEST(MetaGradient, UnrolledMatchesFiniteDifferencesBothModes) {
  RngStream rng(25, 0);
  for (int t = 0; t < 5; ++t) {
    const auto ex = random_examples(2, 3, 3, rng);
    const auto batch = random_examples(3, 3, 3, rng);
    const Vector x = gauss_vector(3, rng);
    const ReweightParams scalar{Vector::Ones(2) + 0.3 * gauss_vector(2, rng), Matrix()};
    const ReweightParams full{Vector::Ones(8) + 0.3 * gauss_vector(8, rng),
                              0.1 * gauss_matrix(8, 3, rng)};
    for (const auto& [mode, p] :
         {std::pair{RiclMode::kScalar, scalar}, std::pair{RiclMode::kTransformer, full}}) {
      const auto a = meta_gradient(mode, p, x, ex, batch, Unrolled{3, 0.5});
      const auto f = meta_gradient(mode, p, x, ex, batch, FiniteDifference{1e-5, 3, 0.5});
      ASSERT_LE(testing::relative_error(flatten(a), flatten(f)), 1e-6);
    }
  }
}

TEST(MetaGradient, EmptyBatchRejected) {
  RngStream rng(26, 0);
  const auto ex = random_examples(2, 2, 2, rng);
  EXPECT_THROW(meta_gradient(RiclMode::kScalar, {Vector::Ones(2), Matrix()}, Vector::Zero(2), ex,
                             {}, OneStepLookahead{}),
               Error);
}

TEST(TraceCsv, HeaderAndRoundTripFormatting) {
  std::ostringstream out;
  write_trace_csv(out, {{0, 0.1, 2.5, 1.0}, {1, 0.05, 0.0, 0.0}});
  EXPECT_EQ(out.str(), "step,l_valid,grad_norm_sq,step_size\n0,0.1,2.5,1\n1,0.05,0,0\n");
}

TEST(LrRule, ReferenceValue) {
  const double expected = std::log(20.0) - (std::log(8.0) + 2 * std::log(8.0) + 125.0) -
                          2 * std::log(20.0);
  EXPECT_NEAR(lr_rule(8, 8, 5.0, 10), expected, 1e-10);
  EXPECT_NEAR(lr_rule(8, 8, 5.0, 10), -134.23, 5e-3);
}

TEST(LrRule, DoublingBatchAddsLnTwo) {
  for (std::size_t b : {1u, 3u, 10u, 77u}) {
    EXPECT_NEAR(lr_rule(8, 8, 5.0, 2 * b) - lr_rule(8, 8, 5.0, b), std::log(2.0), 1e-12);
  }
}

TEST(LrRule, SixteenSquare) {
  EXPECT_NEAR(theoretical_bounds(16, 16, 5.0).log_lipschitz, 133.317, 1e-3);
  EXPECT_NEAR(lr_rule(16, 16, 5.0, 1), std::log(2.0) - 133.317 - 2 * std::log(20.0), 1e-3);
}

TEST(LrRule, MonotoneInBatchAndRadius) {
  EXPECT_LT(lr_rule(8, 8, 5.0, 4), lr_rule(8, 8, 5.0, 5));
  EXPECT_GT(lr_rule(8, 8, 5.0, 4), lr_rule(8, 8, 5.5, 4));
}

TEST(LrRule, Preconditions) {
  EXPECT_THROW(lr_rule(8, 8, 4.0, 10), Error);
  EXPECT_THROW(lr_rule(8, 8, 5.0, 0), Error);
}

TEST(ConvergenceStats, ConstantTrace) {
  TrainTrace trace;
  for (std::size_t t = 0; t <= 20; ++t) trace.push_back({t, 1.0, 0.25, 0.1});
  const auto s = convergence_stats(trace, {1, 4, 16});
  EXPECT_EQ(s.min_grad_sq, (std::vector<double>{0.25, 0.25, 0.25}));
  EXPECT_DOUBLE_EQ(s.c_fit, 0.25 * 4.0);
}

TEST(ConvergenceStats, ZeroGradientStepPropagates) {
  TrainTrace trace;
  for (std::size_t t = 0; t <= 10; ++t) trace.push_back({t, 1.0, t == 5 ? 0.0 : 1.0, 0.1});
  const auto s = convergence_stats(trace, {4, 5, 10});
  EXPECT_EQ(s.min_grad_sq, (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(ConvergenceStats, HorizonBeyondTraceRejected) {
  TrainTrace trace(3);
  EXPECT_THROW(convergence_stats(trace, {3}), Error);
}

}  // namespace
}  // namespace ricl
