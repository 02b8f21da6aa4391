#include "ricl/inner_solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ricl/error.hpp"
#include "ricl/softmax_regression.hpp"

namespace ricl {
namespace {

constexpr double kRoundoff = 64.0 * std::numeric_limits<double>::epsilon();

void check_examples(const std::vector<Example>& examples) {
  require(!examples.empty(), ErrorKind::kShapeMismatch, "prefix has no examples");
  const auto d = examples.front().a.cols();
  for (const auto& e : examples) {
    require(e.a.cols() == d, ErrorKind::kShapeMismatch, "examples disagree on d");
    require(e.a.rows() == e.b.size(), ErrorKind::kShapeMismatch, "example A.rows != b.len");
  }
}

Vector project(const Vector& x, const std::optional<double>& radius) {
  if (!radius) return x;
  const double nrm = x.norm();
  return nrm > *radius ? Vector(x * (*radius / nrm)) : x;
}

}  // namespace

double weighted_softmax_objective(const std::vector<Example>& examples, const Vector& w,
                                  const Vector& x, Vector* grad) {
  double loss = 0.0;
  if (grad) grad->setZero(x.size());
  Vector gi;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const double wi = w(static_cast<Eigen::Index>(i));
    if (wi == 0.0) continue;
    if (grad) {
      loss += wi * sr_loss_and_gradient(examples[i].a, examples[i].b, x, gi);
      *grad += wi * gi;
    } else {
      loss += wi * sr_loss(examples[i].a, examples[i].b, x);
    }
  }
  return loss;
}

SolveResult solve_weighted_softmax(const std::vector<Example>& examples, const Vector& w,
                                   const InnerConfig& cfg) {
  check_examples(examples);
  require(w.size() == static_cast<Eigen::Index>(examples.size()), ErrorKind::kShapeMismatch,
          "inner solve: w.len (" + std::to_string(w.size()) + ") != m (" +
              std::to_string(examples.size()) + ")");
  require(cfg.step_size > 0.0 && cfg.grad_tol > 0.0, ErrorKind::kPreconditionViolation,
          "inner solve: step_size and grad_tol must be > 0");
  const auto d = examples.front().a.cols();

  SolveResult res;
  res.x_star = cfg.init ? *cfg.init : Vector::Zero(d);
  require(res.x_star.size() == d, ErrorKind::kShapeMismatch, "inner solve: init.len != d");

  if (w.isZero(0.0)) {
    res.final_loss = 0.0;
    res.final_grad_norm = 0.0;
    res.loss_trace.push_back(0.0);
    return res;
  }

  Vector& x = res.x_star;
  Vector g;
  double loss = weighted_softmax_objective(examples, w, x, &g);
  res.loss_trace.push_back(loss);
  double lr = cfg.step_size;
  const double lr_cap = cfg.step_size * 1e6;

  auto stationarity = [&](const Vector& at, const Vector& grad) {
    return (at - project(at - grad, cfg.project_radius)).norm();
  };

  double measure = stationarity(x, g);
  while (res.steps_taken < cfg.max_steps && measure > cfg.grad_tol) {
    Vector xn;
    Vector gn;
    double ln = 0.0;
    if (cfg.line_search) {
      lr = std::min(2.0 * lr, lr_cap);
      bool accepted = false;
      for (int k = 0; k < 80; ++k) {
        xn = project(x - lr * g, cfg.project_radius);
        const Vector dx = xn - x;
        ln = weighted_softmax_objective(examples, w, xn, &gn);
        const double dx2 = dx.squaredNorm();
        const bool decrease = ln <= loss + g.dot(dx) + 0.5 / lr * dx2;
        // Once the loss change is lost in roundoff, test the same quadratic
        // bound through the gradients instead.
        const bool roundoff = std::abs(ln - loss) <= kRoundoff * std::abs(loss);
        if (decrease || (roundoff && (gn - g).dot(dx) <= dx2 / lr)) {
          accepted = true;
          break;
        }
        lr *= 0.5;
      }
      // No representable step decreases the model: x is stationary to
      // working precision.
      if (!accepted) break;
    } else {
      xn = project(x - cfg.step_size * g, cfg.project_radius);
      ln = weighted_softmax_objective(examples, w, xn, &gn);
      if (!std::isfinite(ln)) {
        throw DivergenceError(res.steps_taken, "inner solve: objective is not finite");
      }
    }
    x = std::move(xn);
    g = std::move(gn);
    loss = ln;
    res.loss_trace.push_back(loss);
    ++res.steps_taken;
    measure = stationarity(x, g);
  }
  res.final_loss = loss;
  res.final_grad_norm = measure;
  return res;
}

Vector icl_predict(const Matrix& a_query, const Vector& x_star) {
  return softmax_predict(a_query, x_star);
}

std::pair<Matrix, Vector> weighted_linear_aggregate(const std::vector<Example>& examples,
                                                    const Vector& w_full) {
  check_examples(examples);
  const auto n = examples.front().a.rows();
  const auto d = examples.front().a.cols();
  for (const auto& e : examples) {
    require(e.a.rows() == n, ErrorKind::kShapeMismatch, "examples disagree on n");
  }
  require(w_full.size() == weight_length(examples), ErrorKind::kShapeMismatch,
          "weight vector length != m(n+1)");
  const double inv_m = 1.0 / static_cast<double>(examples.size());
  Matrix a = Matrix::Zero(n, d);
  Vector b = Vector::Zero(n);
  Eigen::Index off = 0;
  for (const auto& e : examples) {
    a.noalias() += w_full.segment(off, n).asDiagonal() * e.a;
    b += w_full(off + n) * e.b;
    off += n + 1;
  }
  a *= inv_m;
  b *= inv_m;
  return {std::move(a), std::move(b)};
}

double fallback_ridge(const Matrix& a) {
  return 1e-8 * a.squaredNorm() / static_cast<double>(a.cols());
}

Vector solve_weighted_linear(const std::vector<Example>& examples, const Vector& w_full,
                             double ridge, bool ridge_fallback) {
  const auto [a, b] = weighted_linear_aggregate(examples, w_full);
  if (ridge > 0.0 || !ridge_fallback) return least_squares(a, b, ridge);
  try {
    return least_squares(a, b, 0.0);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kSingularSystem) throw;
    const double r = fallback_ridge(a);
    if (!(r > 0.0)) throw;
    return least_squares(a, b, r);
  }
}

}  // namespace ricl
