#pragma once

// Softmax regression f(x) = <exp(Ax), 1>^{-1} exp(Ax), its squared loss and
// gradient, and the closed-form bound constants used by the convergence
// analysis.
//
// Orientation: everything here uses A x with A of shape n x d. Generated data
// is square (n == d), so the A^T x reading is also shape-valid there.

#include "ricl/linalg.hpp"

namespace ricl {

struct SrInstance {
  Matrix a;           // n x d
  Vector b;           // n
  double radius = 5;  // norm budget R
};

/// Softmax of A x, computed with the max shifted out.
Vector softmax_predict(const Matrix& a, const Vector& x);

/// 0.5 * ||f(x) - b||^2.
double sr_loss(const Matrix& a, const Vector& b, const Vector& x);
inline double sr_loss(const SrInstance& inst, const Vector& x) {
  return sr_loss(inst.a, inst.b, x);
}

/// A^T (diag(f) - f f^T)(f - b).
Vector sr_gradient(const Matrix& a, const Vector& b, const Vector& x);
inline Vector sr_gradient(const SrInstance& inst, const Vector& x) {
  return sr_gradient(inst.a, inst.b, x);
}

/// Loss and gradient from one softmax evaluation.
double sr_loss_and_gradient(const Matrix& a, const Vector& b, const Vector& x, Vector& grad);

/// Partial derivatives of h = <g, grad_x L(x; A, b)> with g held fixed.
///
/// d_x is the Hessian-vector product H g; d_a and d_b are the mixed second
/// derivatives that meta-gradients through a gradient step need.
struct GradientDirectionalPartials {
  Matrix d_a;  // n x d
  Vector d_b;  // n
  Vector d_x;  // d
};
GradientDirectionalPartials gradient_directional_partials(const Matrix& a, const Vector& b,
                                                          const Vector& x, const Vector& g);

/// Hessian of sr_loss applied to v.
Vector sr_hessian_vector(const Matrix& a, const Vector& b, const Vector& x, const Vector& v);

/// Bound constants. The Lipschitz constant d n^2 exp(5 R^2) overflows a
/// double for moderate R, so only its logarithm is kept.
struct BoundReport {
  double grad_bound;      // 4 R
  double log_lipschitz;   // ln d + 2 ln n + 5 R^2
  double residual_bound;  // 2
};

/// Throws kPreconditionViolation unless R > 4 and n, d >= 1.
BoundReport theoretical_bounds(long n, long d, double radius);

/// True when ||A||_2 <= R and ||b||_2 <= 1, the preconditions of the
/// gradient and residual bounds.
bool satisfies_bound_preconditions(const SrInstance& inst);

}  // namespace ricl
