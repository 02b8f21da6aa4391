#include "ricl/softmax_regression.hpp"

#include <cmath>
#include <string>

#include "ricl/error.hpp"

namespace ricl {
namespace {

void check_shapes(const Matrix& a, const Vector& b, const Vector& x) {
  if (a.cols() != x.size() || a.rows() != b.size()) {
    fail(ErrorKind::kShapeMismatch,
         "softmax regression: A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
             ", b has " + std::to_string(b.size()) + ", x has " + std::to_string(x.size()));
  }
}

// (diag(f) - f f^T) v without forming the matrix.
Vector jacobian_apply(const Vector& f, const Vector& v) {
  return f.cwiseProduct(v) - f * f.dot(v);
}

}  // namespace

Vector softmax_predict(const Matrix& a, const Vector& x) {
  require(a.cols() == x.size(), ErrorKind::kShapeMismatch,
          "softmax_predict: A.cols != x.len");
  Vector u = a * x;
  const double shift = u.maxCoeff();
  u = (u.array() - shift).exp();
  return u / u.sum();
}

double sr_loss(const Matrix& a, const Vector& b, const Vector& x) {
  check_shapes(a, b, x);
  return 0.5 * (softmax_predict(a, x) - b).squaredNorm();
}

Vector sr_gradient(const Matrix& a, const Vector& b, const Vector& x) {
  Vector grad;
  sr_loss_and_gradient(a, b, x, grad);
  return grad;
}

double sr_loss_and_gradient(const Matrix& a, const Vector& b, const Vector& x, Vector& grad) {
  check_shapes(a, b, x);
  const Vector f = softmax_predict(a, x);
  const Vector c = f - b;
  grad = a.transpose() * jacobian_apply(f, c);
  return 0.5 * c.squaredNorm();
}

GradientDirectionalPartials gradient_directional_partials(const Matrix& a, const Vector& b,
                                                          const Vector& x, const Vector& g) {
  check_shapes(a, b, x);
  require(g.size() == a.cols(), ErrorKind::kShapeMismatch,
          "gradient_directional_partials: g.len != A.cols");
  const Vector f = softmax_predict(a, x);
  const Vector c = f - b;
  const Vector s = a * g;
  const Vector q = jacobian_apply(f, c);
  const Vector js = jacobian_apply(f, s);
  // h = s^T J(u) c(u); dh = v^T df with df = J du.
  const Vector v = s.cwiseProduct(c) - f.dot(c) * s - s.dot(f) * c + js;
  const Vector dh_du = jacobian_apply(f, v);

  GradientDirectionalPartials out;
  out.d_a = q * g.transpose() + dh_du * x.transpose();
  out.d_b = -js;
  out.d_x = a.transpose() * dh_du;
  return out;
}

Vector sr_hessian_vector(const Matrix& a, const Vector& b, const Vector& x, const Vector& v) {
  return gradient_directional_partials(a, b, x, v).d_x;
}

BoundReport theoretical_bounds(long n, long d, double radius) {
  require(n >= 1 && d >= 1, ErrorKind::kPreconditionViolation,
          "theoretical_bounds: n and d must be >= 1");
  require(radius > 4.0, ErrorKind::kPreconditionViolation,
          "theoretical_bounds: the bounds require R > 4, got " + std::to_string(radius));
  BoundReport r;
  r.grad_bound = 4.0 * radius;
  r.log_lipschitz = std::log(static_cast<double>(d)) + 2.0 * std::log(static_cast<double>(n)) +
                    5.0 * radius * radius;
  r.residual_bound = 2.0;
  return r;
}

bool satisfies_bound_preconditions(const SrInstance& inst) {
  return operator_norm(inst.a) <= inst.radius && inst.b.norm() <= 1.0;
}

}  // namespace ricl
