#include "ricl/laricl.hpp"

#include <cmath>
#include <string>

#include "ricl/error.hpp"

namespace ricl {
namespace {

struct LinearFit {
  Matrix a;
  Vector b;
  LeastSquaresFactor factor;
  Vector x;
};

LinearFit fit(const Vector& w_full, const std::vector<Example>& examples,
              const LinearRidge& ridge) {
  auto [a, b] = weighted_linear_aggregate(examples, w_full);
  double r = ridge.ridge;
  if (r == 0.0 && ridge.fallback) {
    try {
      LeastSquaresFactor f(a, 0.0);
      Vector x = f.solve(b);
      return {std::move(a), std::move(b), std::move(f), std::move(x)};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSingularSystem) throw;
      r = fallback_ridge(a);
      if (!(r > 0.0)) throw;
    }
  }
  LeastSquaresFactor f(a, r);
  Vector x = f.solve(b);
  return {std::move(a), std::move(b), std::move(f), std::move(x)};
}

void check_valset(const std::vector<Example>& valset, Eigen::Index d) {
  require(!valset.empty(), ErrorKind::kPreconditionViolation, "validation set is empty");
  for (const auto& v : valset) {
    require(v.a.cols() == d && v.a.rows() == v.b.size(), ErrorKind::kShapeMismatch,
            "validation example does not match the prefix shape");
  }
}

double residual_loss(const std::vector<Example>& valset, const Vector& x) {
  double total = 0.0;
  for (const auto& v : valset) total += (v.a * x - v.b).squaredNorm();
  return total;
}

}  // namespace

double laricl_val_loss(const Vector& w_full, const std::vector<Example>& examples,
                       const std::vector<Example>& valset, const LinearRidge& ridge) {
  const auto f = fit(w_full, examples, ridge);
  check_valset(valset, f.x.size());
  return residual_loss(valset, f.x);
}

Vector laricl_grad(const Vector& w_full, const std::vector<Example>& examples,
                   const std::vector<Example>& valset, const LariclGradMethod& method,
                   const LinearRidge& ridge) {
  if (const auto* fd = std::get_if<CentralDifference>(&method)) {
    require(fd->h > 0.0, ErrorKind::kPreconditionViolation, "finite difference: h must be > 0");
    Vector grad(w_full.size());
    Vector probe = w_full;
    for (Eigen::Index k = 0; k < w_full.size(); ++k) {
      probe(k) = w_full(k) + fd->h;
      const double up = laricl_val_loss(probe, examples, valset, ridge);
      probe(k) = w_full(k) - fd->h;
      const double down = laricl_val_loss(probe, examples, valset, ridge);
      probe(k) = w_full(k);
      grad(k) = (up - down) / (2.0 * fd->h);
    }
    return grad;
  }

  const auto f = fit(w_full, examples, ridge);
  check_valset(valset, f.x.size());
  // x = M^{-1} A^T b with M = A^T A + ridge I. For loss(x) with gradient g_x,
  // lambda = M^{-1} g_x gives dL/dA = (b - A x) lambda^T - (A lambda) x^T and
  // dL/db = A lambda.
  Vector gx = Vector::Zero(f.x.size());
  for (const auto& v : valset) gx += 2.0 * v.a.transpose() * (v.a * f.x - v.b);
  const Vector lambda = f.factor.solve_normal(gx);
  const Vector a_lambda = f.a * lambda;
  const Matrix d_a = (f.b - f.a * f.x) * lambda.transpose() - a_lambda * f.x.transpose();

  const auto n = examples.front().a.rows();
  const double inv_m = 1.0 / static_cast<double>(examples.size());
  Vector grad(w_full.size());
  Eigen::Index off = 0;
  for (const auto& e : examples) {
    grad.segment(off, n) = inv_m * d_a.cwiseProduct(e.a).rowwise().sum();
    grad(off + n) = inv_m * e.b.dot(a_lambda);
    off += n + 1;
  }
  return grad;
}

LariclResult laricl_train(const std::vector<Example>& examples,
                          const std::vector<Example>& valset, const LariclConfig& cfg) {
  require(cfg.outer_lr > 0.0, ErrorKind::kPreconditionViolation, "outer_lr must be > 0");
  require(cfg.ridge >= 0.0, ErrorKind::kPreconditionViolation, "ridge must be >= 0");
  const LinearRidge ridge{cfg.ridge, cfg.ridge_fallback};

  LariclResult out;
  out.w = Vector::Ones(weight_length(examples));
  double loss = laricl_val_loss(out.w, examples, valset, ridge);
  if (!std::isfinite(loss)) throw DivergenceError(0, "laricl: initial loss is not finite");

  for (std::size_t t = 0; t < cfg.outer_steps; ++t) {
    const Vector g = laricl_grad(out.w, examples, valset, cfg.grad_method, ridge);
    const double gn2 = g.squaredNorm();
    double alpha = cfg.outer_lr;
    double taken = 0.0;
    const std::size_t tries = cfg.backtracking ? cfg.max_backtracks + 1 : 1;
    for (std::size_t k = 0; k < tries; ++k, alpha *= 0.5) {
      const Vector next = out.w - alpha * g;
      double cand = 0.0;
      try {
        cand = laricl_val_loss(next, examples, valset, ridge);
      } catch (const Error& e) {
        // A singular trial point is a rejected step under backtracking.
        if (!cfg.backtracking || e.kind() != ErrorKind::kSingularSystem) throw;
        continue;
      }
      if (!cfg.backtracking) {
        if (!std::isfinite(cand)) {
          throw DivergenceError(t + 1, "laricl: validation loss is not finite at step " +
                                           std::to_string(t + 1));
        }
      } else if (!(cand <= loss)) {
        continue;
      }
      out.trace.push_back({t, loss, gn2, alpha});
      out.w = next;
      loss = cand;
      taken = alpha;
      break;
    }
    if (taken == 0.0) out.trace.push_back({t, loss, gn2, 0.0});
  }
  const Vector g = laricl_grad(out.w, examples, valset, cfg.grad_method, ridge);
  out.trace.push_back({cfg.outer_steps, loss, g.squaredNorm(), 0.0});
  out.x = fit(out.w, examples, ridge).x;
  return out;
}

}  // namespace ricl
