#pragma once

// Inner problem of the bilevel objective: fit the implicit parameter x to a
// weighted prefix, either under the softmax model (iterative) or the linear
// model (closed form).

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ricl/linalg.hpp"

namespace ricl {

struct Example {
  Matrix a;  // n x d
  Vector b;  // n
};

struct InnerConfig {
  std::size_t max_steps = 500;
  // Fixed step, or the first trial step when line_search is on.
  double step_size = 1.0;
  // Tolerance on the projected-gradient norm ||x - P(x - grad)||.
  double grad_tol = 1e-9;
  std::optional<double> project_radius;
  std::optional<Vector> init;  // zero vector when unset
  // Backtracking on the sufficient-decrease condition; off gives plain
  // fixed-step projected gradient descent.
  bool line_search = true;
};

struct SolveResult {
  Vector x_star;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  std::size_t steps_taken = 0;
  std::vector<double> loss_trace;  // objective before the first and after every step
};

/// Weighted objective sum_i w_i * sr_loss(A_i, b_i, x) and its gradient.
double weighted_softmax_objective(const std::vector<Example>& examples, const Vector& w,
                                  const Vector& x, Vector* grad = nullptr);

/// argmin_x sum_i w_i * sr_loss(A_i, b_i, x) by (projected) gradient descent.
/// An all-zero w returns the initial point with steps_taken = 0.
SolveResult solve_weighted_softmax(const std::vector<Example>& examples, const Vector& w,
                                   const InnerConfig& cfg);

/// Prediction of the in-context learner for a query matrix.
Vector icl_predict(const Matrix& a_query, const Vector& x_star);

/// Aggregates (1/m) sum diag(w_a_i) A_i and (1/m) sum w_b_i b_i, with w_full laid
/// out per example as [w_a_i (n entries), w_b_i].
std::pair<Matrix, Vector> weighted_linear_aggregate(const std::vector<Example>& examples,
                                                    const Vector& w_full);

/// Ridge used when the aggregate system is singular: 1e-8 * trace(A^T A) / d.
double fallback_ridge(const Matrix& a);

/// Closed-form x = argmin ||A x - b||^2 + ridge ||x||^2 over the aggregates.
/// With ridge == 0 a singular system throws kSingularSystem unless
/// ridge_fallback is set, in which case fallback_ridge(A) is used.
Vector solve_weighted_linear(const std::vector<Example>& examples, const Vector& w_full,
                             double ridge = 0.0, bool ridge_fallback = false);

/// Length of a per-row weight vector for m examples with n rows each.
inline Eigen::Index weight_length(const std::vector<Example>& examples) {
  Eigen::Index len = 0;
  for (const auto& e : examples) len += e.a.rows() + 1;
  return len;
}

}  // namespace ricl
