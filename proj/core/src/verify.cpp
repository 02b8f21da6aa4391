#include "ricl/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include "ricl/bench.hpp"
#include "ricl/dataset_io.hpp"
#include "ricl/error.hpp"
#include "ricl/laricl.hpp"
#include "ricl/ricl.hpp"
#include "ricl/softmax_regression.hpp"

namespace ricl {
namespace {

PropertyResult pass(std::string detail = {}) { return {true, std::move(detail)}; }
PropertyResult failed(std::string detail) { return {false, std::move(detail)}; }

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Eigen::Index draw_size(RngStream& rng, Eigen::Index lo, Eigen::Index hi) {
  return lo + static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

Vector draw_in_ball(Eigen::Index len, double radius, RngStream& rng) {
  Vector v = gauss_vector(len, rng);
  return v * (radius * rng.uniform() / v.norm());
}

Matrix draw_with_norm_at_most(Eigen::Index rows, Eigen::Index cols, double bound,
                              RngStream& rng) {
  Matrix a = gauss_matrix(rows, cols, rng);
  const double nrm = operator_norm(a);
  // Slightly inside the bound so the power-iteration tolerance cannot push it over.
  return a * (bound * (1.0 - 1e-9) * rng.uniform() / nrm);
}

double rel_diff(const Vector& a, const Vector& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p(i) = x(i) + h;
    const double up = f(p);
    p(i) = x(i) - h;
    const double down = f(p);
    p(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

std::vector<Example> random_examples(Eigen::Index m, Eigen::Index n, Eigen::Index d,
                                     RngStream& rng) {
  std::vector<Example> out;
  for (Eigen::Index i = 0; i < m; ++i) {
    out.push_back({gauss_matrix(n, d, rng), draw_in_ball(n, 1.0, rng)});
  }
  return out;
}

// ---- core-linalg ----

PropertyResult kron_vec_identity(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 101);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto r1 = draw_size(rng, 1, 4), c1 = draw_size(rng, 1, 4);
    const auto r2 = draw_size(rng, 1, 4), c2 = draw_size(rng, 1, 4);
    const Matrix a1 = gauss_matrix(r1, c1, rng), a2 = gauss_matrix(r2, c2, rng);
    const Matrix x = gauss_matrix(c1, c2, rng), b = gauss_matrix(r1, r2, rng);
    const double lhs = (a1 * x * a2.transpose() - b).squaredNorm();
    const double rhs = (kron(a1, a2) * vec(x) - vec(b)).squaredNorm();
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(lhs, 1e-300));
  }
  return worst <= 1e-12 ? pass("max rel err " + num(worst))
                        : failed("max rel err " + num(worst) + " > 1e-12");
}

PropertyResult least_squares_orthogonality(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 102);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto d = draw_size(rng, 1, 6);
    const auto n = d + draw_size(rng, 0, 6);
    const Matrix a = gauss_matrix(n, d, rng);
    const Vector b = gauss_vector(n, rng);
    const Vector x = least_squares(a, b);
    const double ratio = (a.transpose() * (a * x - b)).norm() / (operator_norm(a) * b.norm());
    worst = std::max(worst, ratio);
  }
  return worst <= 1e-8 ? pass("max ||A^T r|| / (||A|| ||b||) = " + num(worst))
                       : failed("normal residual ratio " + num(worst) + " > 1e-8");
}

PropertyResult gauss_reproducible(const PropertyContext& ctx) {
  RngStream r1(ctx.seed, 103), r2(ctx.seed, 103), r3(ctx.seed, 104);
  const Matrix a = gauss_matrix(5, 7, r1), b = gauss_matrix(5, 7, r2), c = gauss_matrix(5, 7, r3);
  if (std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) != 0) {
    return failed("same (seed, stream) produced different bits");
  }
  if (a == c) return failed("distinct streams produced identical matrices");
  return pass();
}

// ---- softmax-regression ----

PropertyResult sr_normalization(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 201);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto n = draw_size(rng, 1, 8), d = draw_size(rng, 1, 8);
    // Include magnitudes far past exp overflow.
    const double scale = std::pow(10.0, 4.0 * rng.uniform() - 1.0);
    const Matrix a = scale * gauss_matrix(n, d, rng);
    const Vector x = gauss_vector(d, rng);
    const Vector f = softmax_predict(a, x);
    if ((f.array() < 0.0).any() || (f.array() > 1.0).any()) return failed("entry outside [0, 1]");
    // Entries are strictly positive unless exp of the shifted logit underflows.
    const Vector u = a * x;
    if (u.maxCoeff() - u.minCoeff() < 700.0 && !(f.array() > 0.0).all()) {
      return failed("zero entry without underflow");
    }
    worst = std::max(worst, std::abs(f.sum() - 1.0));
  }
  return worst <= 1e-12 ? pass("max |sum - 1| " + num(worst))
                        : failed("|sum - 1| = " + num(worst));
}

PropertyResult sr_gradient_check(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 202);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto n = draw_size(rng, 1, 8), d = draw_size(rng, 1, 8);
    const Matrix a = gauss_matrix(n, d, rng);
    const Vector b = draw_in_ball(n, 1.0, rng);
    const Vector x = gauss_vector(d, rng) / std::sqrt(static_cast<double>(d));
    const Vector g = sr_gradient(a, b, x);
    const Vector fd = fd_gradient([&](const Vector& p) { return sr_loss(a, b, p); }, x, 1e-5);
    worst = std::max(worst, rel_diff(g, fd));
  }
  return worst <= 1e-6 ? pass("max rel err " + num(worst))
                       : failed("max rel err " + num(worst) + " > 1e-6");
}

struct BoundCase {
  Matrix a;
  Vector b;
  Vector x;
};

std::vector<BoundCase> bound_cases(std::uint64_t seed, double radius) {
  RngStream rng(seed, 203);
  std::vector<BoundCase> out;
  for (int t = 0; t < 1000; ++t) {
    const auto n = draw_size(rng, 1, 8), d = draw_size(rng, 1, 8);
    out.push_back({draw_with_norm_at_most(n, d, radius, rng), draw_in_ball(n, 1.0, rng),
                   draw_in_ball(d, radius, rng)});
  }
  return out;
}

PropertyResult sr_gradient_bound(const PropertyContext& ctx) {
  const double radius = 5.0;
  const double bound = theoretical_bounds(8, 8, radius).grad_bound;
  int violations = 0;
  double worst = 0.0;
  for (const auto& c : bound_cases(ctx.seed, radius)) {
    const double g = sr_gradient(c.a, c.b, c.x).norm();
    worst = std::max(worst, g);
    violations += g > bound;
  }
  return violations == 0 ? pass("max ||grad|| " + num(worst) + " <= " + num(bound))
                         : failed(std::to_string(violations) + " violations");
}

PropertyResult sr_residual_bound(const PropertyContext& ctx) {
  int violations = 0;
  double worst = 0.0;
  for (const auto& c : bound_cases(ctx.seed, 5.0)) {
    const double r = (softmax_predict(c.a, c.x) - c.b).norm();
    worst = std::max(worst, r);
    violations += r > 2.0;
  }
  return violations == 0 ? pass("max ||f - b|| " + num(worst))
                         : failed(std::to_string(violations) + " violations");
}

PropertyResult sr_lipschitz_log(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 204);
  const double radius = 5.0;
  int violations = 0;
  double worst = -INFINITY;
  for (int t = 0; t < 100; ++t) {
    const auto n = draw_size(rng, 1, 8), d = draw_size(rng, 1, 8);
    const Matrix a = draw_with_norm_at_most(n, d, radius, rng);
    const Vector b = draw_in_ball(n, 1.0, rng);
    const Vector x = draw_in_ball(d, radius, rng), y = draw_in_ball(d, radius, rng);
    const double num_diff = (sr_gradient(a, b, x) - sr_gradient(a, b, y)).norm();
    if (num_diff == 0.0) continue;
    const double lhs = std::log(num_diff) - std::log((x - y).norm());
    const double limit = theoretical_bounds(n, d, radius).log_lipschitz;
    worst = std::max(worst, lhs - limit);
    violations += lhs > limit;
  }
  return violations == 0 ? pass("max log-ratio minus log L: " + num(worst))
                         : failed(std::to_string(violations) + " violations");
}

// ---- inner-solver ----

PropertyResult inner_stationary(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 301);
  InnerConfig cfg;
  cfg.max_steps = 2000;
  for (int t = 0; t < 20; ++t) {
    const auto n = draw_size(rng, 2, 5);
    const auto ex = random_examples(draw_size(rng, 1, 4), n, n, rng);
    Vector w(static_cast<Eigen::Index>(ex.size()));
    for (auto& v : w) v = 0.5 + rng.uniform();
    const auto res = solve_weighted_softmax(ex, w, cfg);
    if (res.steps_taken < cfg.max_steps) {
      Vector g;
      weighted_softmax_objective(ex, w, res.x_star, &g);
      if (g.norm() > cfg.grad_tol) {
        return failed("instance " + std::to_string(t) + ": ||grad|| " + num(g.norm()));
      }
    }
  }
  return pass();
}

PropertyResult inner_weight_scaling(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 302);
  InnerConfig cfg;
  cfg.max_steps = 5000;
  cfg.grad_tol = 1e-12;
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    TaskSpec task = gen_task(4, 4, 6, rng);
    const auto ex = gen_examples(PrefixKind::noisy(0.05), task, rng);
    Vector w(6);
    for (auto& v : w) v = 0.5 + rng.uniform();
    const double lambda = 0.25 + 4.0 * rng.uniform();
    const Vector x1 = solve_weighted_softmax(ex, w, cfg).x_star;
    const Vector x2 = solve_weighted_softmax(ex, lambda * w, cfg).x_star;
    const double l1 = weighted_softmax_objective(ex, w, x1);
    const double l2 = weighted_softmax_objective(ex, w, x2);
    worst = std::max(worst, std::abs(l1 - l2) / std::max(l1, 1e-300));
  }
  return worst <= 1e-6 ? pass("max rel loss gap " + num(worst))
                       : failed("rel loss gap " + num(worst) + " > 1e-6");
}

PropertyResult inner_linear_consistent(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 303);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto d = draw_size(rng, 1, 5);
    const auto n = d + draw_size(rng, 0, 3);
    const Vector x_true = gauss_vector(d, rng);
    std::vector<Example> ex;
    for (Eigen::Index i = 0, m = draw_size(rng, 1, 4); i < m; ++i) {
      Matrix a = gauss_matrix(n, d, rng);
      Vector b = a * x_true;
      ex.push_back({std::move(a), std::move(b)});
    }
    const Vector w = Vector::Ones(weight_length(ex));
    const auto [agg_a, agg_b] = weighted_linear_aggregate(ex, w);
    const Vector x = solve_weighted_linear(ex, w);
    worst = std::max(worst, (agg_a * x - agg_b).norm());
  }
  return worst <= 1e-9 ? pass("max residual " + num(worst))
                       : failed("residual " + num(worst) + " > 1e-9");
}

// ---- reweight-transform ----

double lift_gap(std::uint64_t seed, std::uint64_t stream, Eigen::Index m, int trials) {
  RngStream rng(seed, stream);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto ex = random_examples(m, 4, 4, rng);
    const Vector x = gauss_vector(4, rng);
    Vector w(m);
    for (auto& v : w) v = 3.0 * rng.uniform();
    double weighted = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& e = ex[static_cast<std::size_t>(i)];
      weighted += w(i) * (softmax_predict(e.a, x) - e.b).squaredNorm();
    }
    const auto params = lift_scalar_weights(w, ex, {LiftAnchor::kPrediction, x});
    worst = std::max(worst, std::abs(weighted - transformer_loss(x, ex, params)));
  }
  return worst;
}

PropertyResult reweight_lift_single(const PropertyContext& ctx) {
  const double gap = lift_gap(ctx.seed, 401, 1, 100);
  return gap <= 1e-9 ? pass("max gap " + num(gap)) : failed("gap " + num(gap) + " > 1e-9");
}

PropertyResult reweight_lift_multi(const PropertyContext& ctx) {
  const double gap = lift_gap(ctx.seed, 402, 5, 100);
  return gap <= 1e-9 ? pass("max gap " + num(gap)) : failed("gap " + num(gap) + " > 1e-9");
}

PropertyResult reweight_affine_in_bias(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 403);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto p = assemble_prefix(random_examples(3, 3, 3, rng));
    const Vector w = gauss_vector(p.assembled.rows(), rng);
    const Matrix b1 = gauss_matrix(p.assembled.rows(), 3, rng);
    const Matrix b2 = gauss_matrix(p.assembled.rows(), 3, rng);
    const double alpha = rng.normal(), beta = rng.normal();
    const Matrix mixed = apply_reweight(p, {w, alpha * b1 + beta * b2}).assembled;
    const Matrix parts = alpha * apply_reweight(p, {w, b1}).assembled +
                         beta * apply_reweight(p, {w, b2}).assembled +
                         (1.0 - alpha - beta) *
                             apply_reweight(p, {w, Matrix::Zero(p.assembled.rows(), 3)}).assembled;
    worst = std::max(worst, (mixed - parts).cwiseAbs().maxCoeff());
  }
  return worst <= 1e-12 ? pass("max deviation " + num(worst))
                        : failed("deviation " + num(worst) + " > 1e-12");
}

PropertyResult reweight_reg_zero_iff(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 404);
  for (int t = 0; t < 20; ++t) {
    const auto ex = random_examples(3, 4, 4, rng);
    const Vector x = gauss_vector(4, rng);
    Vector w(3);
    for (auto& v : w) v = 2.0 * rng.uniform();
    for (const auto anchor : {LiftAnchor::kData, LiftAnchor::kPrediction}) {
      const LiftOptions opts{anchor, x};
      const RegConfig reg{0.7, opts};
      const auto lifted = lift_scalar_weights(w, ex, opts);
      const double at_lift = reg_term(lifted, ex, reg);
      if (at_lift > 1e-12) return failed("reg at lifted params " + num(at_lift));
      auto moved = lifted;
      const auto row = static_cast<Eigen::Index>(rng.uniform() * moved.b.rows());
      moved.b(row, 0) += 1e-3;
      if (!(reg_term(moved, ex, reg) > 0.0)) return failed("perturbed params have zero reg");
    }
  }
  return pass();
}

// ---- ricl-optimizer ----

Dataset small_dataset(std::uint64_t seed, const PrefixKind& kind) {
  return gen_dataset(seed, kind, 4, 4, 8, 40, 40);
}

PropertyResult ricl_monotone(const PropertyContext& ctx) {
  RiclConfig cfg;
  cfg.outer_steps = 200;
  cfg.backtracking = true;
  cfg.inner.project_radius = 4.0;
  double worst = -INFINITY;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto ds = small_dataset(ctx.seed + s, PrefixKind::noisy(0.5));
    const auto trace = ricl_train(ds.prefix, ds.validation, cfg).trace;
    for (std::size_t t = 1; t < trace.size(); ++t) {
      worst = std::max(worst, trace[t].l_valid - trace[t - 1].l_valid);
    }
  }
  return worst <= 1e-12 ? pass("max increase " + num(worst))
                        : failed("loss increased by " + num(worst));
}

PropertyResult ricl_stationarity(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 501);
  for (int t = 0; t < 10; ++t) {
    const Matrix a = gauss_matrix(4, 4, rng);
    const Vector x0 = gauss_vector(4, rng);
    const std::vector<Example> ex{{a, softmax_predict(a, x0)}};
    RiclConfig cfg;
    cfg.outer_steps = 3;
    cfg.inner.init = x0;
    const auto trace = ricl_train(ex, ex, cfg).trace;
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
      if (trace[k].grad_norm_sq != 0.0) return failed("nonzero gradient at a fixed point");
      if (trace[k + 1].l_valid != trace[k].l_valid) return failed("loss moved at zero gradient");
    }
  }
  // Away from a fixed point the gradient is nonzero and a step changes the loss.
  const auto ds = small_dataset(ctx.seed, PrefixKind::noisy(0.5));
  RiclConfig cfg;
  cfg.outer_steps = 1;
  cfg.backtracking = true;
  cfg.inner.project_radius = 4.0;
  const auto trace = ricl_train(ds.prefix, ds.validation, cfg).trace;
  if (!(trace[0].grad_norm_sq > 0.0) || !(trace[1].l_valid < trace[0].l_valid)) {
    return failed("nonzero gradient did not move the loss");
  }
  return pass();
}

PropertyResult ricl_meta_gradient_exact(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 502);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto ex = random_examples(2, 2, 2, rng);
    const auto batch = random_examples(2, 2, 2, rng);
    const Vector x_t = gauss_vector(2, rng);
    for (const auto mode : {RiclMode::kScalar, RiclMode::kTransformer}) {
      ReweightParams params;
      if (mode == RiclMode::kScalar) {
        params.w = Vector::Ones(2) + 0.5 * gauss_vector(2, rng);
      } else {
        params.w = Vector::Ones(6) + 0.3 * gauss_vector(6, rng);
        params.b = 0.2 * gauss_matrix(6, 2, rng);
      }
      for (const std::size_t steps : {std::size_t{1}, std::size_t{3}}) {
        const double eta = 0.5;
        const auto an = meta_gradient(mode, params, x_t, ex, batch, Unrolled{steps, eta});
        const auto fd =
            meta_gradient(mode, params, x_t, ex, batch, FiniteDifference{1e-5, steps, eta});
        Vector a(an.w.size() + an.b.size()), f(a.size());
        a << an.w, Eigen::Map<const Vector>(an.b.data(), an.b.size());
        f << fd.w, Eigen::Map<const Vector>(fd.b.data(), fd.b.size());
        worst = std::max(worst, rel_diff(a, f));
      }
    }
  }
  return worst <= 1e-6 ? pass("max rel err " + num(worst))
                       : failed("max rel err " + num(worst) + " > 1e-6");
}

PropertyResult ricl_lr_rule_monotone(const PropertyContext&) {
  for (const double r : {4.5, 5.0, 6.0}) {
    for (std::size_t bs = 1; bs < 64; bs *= 2) {
      if (!(lr_rule(8, 8, r, 2 * bs) > lr_rule(8, 8, r, bs))) {
        return failed("not increasing in batch size");
      }
      if (!(lr_rule(8, 8, r + 0.5, bs) < lr_rule(8, 8, r, bs))) {
        return failed("not decreasing in R");
      }
    }
  }
  return pass();
}

// ---- laricl-optimizer ----

PropertyResult laricl_gradient_check(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 601);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto d = draw_size(rng, 1, 4);
    const auto n = d + draw_size(rng, 0, 4 - d);
    const auto ex = random_examples(draw_size(rng, 1, 3), n, d, rng);
    const auto val = random_examples(3, n, d, rng);
    const Vector w = Vector::Ones(weight_length(ex)) + 0.3 * gauss_vector(weight_length(ex), rng);
    const Vector an = laricl_grad(w, ex, val, AnalyticGradient{});
    // Richardson extrapolation of two central differences removes the h^2
    // truncation term, which dominates on ill-conditioned aggregates.
    const Vector fd1 = laricl_grad(w, ex, val, CentralDifference{1e-5});
    const Vector fd2 = laricl_grad(w, ex, val, CentralDifference{5e-6});
    worst = std::max(worst, rel_diff(an, (4.0 * fd2 - fd1) / 3.0));
  }
  return worst <= 1e-6 ? pass("max rel err " + num(worst))
                       : failed("max rel err " + num(worst) + " > 1e-6");
}

PropertyResult laricl_monotone(const PropertyContext& ctx) {
  LariclConfig cfg;
  cfg.outer_steps = 50;
  cfg.outer_lr = 1.0;
  cfg.backtracking = true;
  double worst = -INFINITY;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto ds = small_dataset(ctx.seed + s, PrefixKind::noisy(0.5));
    const auto trace = laricl_train(ds.prefix, ds.validation, cfg).trace;
    for (std::size_t t = 1; t < trace.size(); ++t) {
      worst = std::max(worst, trace[t].l_valid - trace[t - 1].l_valid);
    }
  }
  return worst <= 1e-12 ? pass("max increase " + num(worst))
                        : failed("loss increased by " + num(worst));
}

PropertyResult laricl_normal_equations(const PropertyContext& ctx) {
  const auto ds = small_dataset(ctx.seed, PrefixKind::noisy(0.5));
  LariclConfig cfg;
  cfg.outer_lr = 1.0;
  cfg.backtracking = true;
  double worst = 0.0;
  for (std::size_t steps = 0; steps <= 10; ++steps) {
    cfg.outer_steps = steps;
    const auto res = laricl_train(ds.prefix, ds.validation, cfg);
    const auto [a, b] = weighted_linear_aggregate(ds.prefix, res.w);
    const double r = (a.transpose() * (a * res.x - b)).norm() / (operator_norm(a) * b.norm());
    worst = std::max(worst, r);
  }
  return worst <= 1e-8 ? pass("max normal residual ratio " + num(worst))
                       : failed("normal residual ratio " + num(worst) + " > 1e-8");
}

// ---- datagen ----

PropertyResult datagen_simplex(const PropertyContext& ctx) {
  for (const auto& kind : {PrefixKind::random(), PrefixKind::imbalanced(0.8)}) {
    const auto ds = gen_dataset(ctx.seed, kind, ctx.preset);
    for (const auto* set : {&ds.prefix, &ds.validation, &ds.test}) {
      for (const auto& e : *set) {
        if (std::abs(e.b.sum() - 1.0) > 1e-12) return failed("target does not sum to 1");
        if (!((e.b.array() > 0.0).all() && (e.b.array() < 1.0).all())) {
          return failed("target entry outside (0, 1)");
        }
      }
    }
  }
  return pass();
}

PropertyResult datagen_deterministic(const PropertyContext& ctx) {
  std::ostringstream a, b;
  write_dataset(a, gen_dataset(ctx.seed, PrefixKind::imbalanced_noisy(), ctx.preset));
  write_dataset(b, gen_dataset(ctx.seed, PrefixKind::imbalanced_noisy(), ctx.preset));
  return a.str() == b.str() ? pass(std::to_string(a.str().size()) + " bytes")
                            : failed("dataset bytes differ between runs");
}

PropertyResult datagen_norm_bound(const PropertyContext& ctx) {
  double worst = 0.0;
  for (const auto& kind : {PrefixKind::random(), PrefixKind::imbalanced(1.6)}) {
    for (const auto& e : gen_dataset(ctx.seed, kind, ctx.preset).prefix) {
      worst = std::max(worst, e.b.norm());
    }
  }
  return worst <= 1.0 ? pass("max ||b|| " + num(worst)) : failed("||b|| = " + num(worst));
}

// ---- bench ----

PropertyResult bench_minmax_order(const PropertyContext& ctx) {
  RngStream rng(ctx.seed, 801);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(static_cast<std::size_t>(draw_size(rng, 1, 10)));
    for (auto& x : v) x = std::exp(3.0 * rng.normal());
    const auto s = minmax_scale(v);
    if (std::min_element(v.begin(), v.end()) - v.begin() !=
            std::min_element(s.begin(), s.end()) - s.begin() ||
        std::max_element(v.begin(), v.end()) - v.begin() !=
            std::max_element(s.begin(), s.end()) - s.begin()) {
      return failed("argmin/argmax moved");
    }
    for (const double x : s) {
      if (x < 0.0 || x > 1.0) return failed("scaled value outside [0, 1]");
    }
  }
  return pass();
}

BenchSpec small_bench(const PropertyContext& ctx) {
  BenchSpec spec = default_bench_spec(ctx.preset, ctx.seed);
  spec.cells = {PrefixKind::random(), PrefixKind::noisy(0.8)};
  spec.seeds = 2;
  spec.ricl.outer_steps = 10;
  spec.laricl.outer_steps = 10;
  return spec;
}

PropertyResult bench_reproducible(const PropertyContext& ctx) {
  BenchSpec spec = small_bench(ctx);
  spec.jobs = 1;
  std::ostringstream a, b;
  write_bench_csv(a, run_benchmark(spec));
  spec.jobs = std::max<std::size_t>(ctx.jobs, 3);
  write_bench_csv(b, run_benchmark(spec));
  return a.str() == b.str() ? pass() : failed("CSV bytes depend on the job count");
}

PropertyResult bench_oracle_floor(const PropertyContext& ctx) {
  BenchSpec spec = small_bench(ctx);
  spec.jobs = ctx.jobs;
  const auto summary = summarize(run_benchmark(spec));
  // Below this absolute level MSE differences are inner-solver resolution, not method quality.
  constexpr double kFloor = 1e-10;
  for (const auto& o : summary) {
    if (o.method != "oracle") continue;
    for (const auto& r : summary) {
      if (r.kind != o.kind || r.param != o.param || r.method == "oracle") continue;
      if (!(o.mse_mean <= 1.05 * r.mse_mean + kFloor)) {
        return failed(o.kind + "/" + r.method + ": oracle " + num(o.mse_mean) + " vs " +
                      num(r.mse_mean));
      }
    }
  }
  return pass();
}

// ---- cli ----

PropertyResult cli_dataset_roundtrip(const PropertyContext& ctx) {
  std::ostringstream first;
  write_dataset(first, gen_dataset(ctx.seed, PrefixKind::noisy(0.8), ctx.preset));
  std::istringstream in(first.str());
  std::ostringstream second;
  write_dataset(second, read_dataset(in));
  return first.str() == second.str() ? pass() : failed("dataset bytes changed on round trip");
}

PropertyResult cli_unique_names(const PropertyContext&) {
  std::set<std::string> seen;
  for (const auto& p : property_registry()) {
    if (!seen.insert(p.name).second) return failed("duplicate property " + p.name);
  }
  return pass(std::to_string(seen.size()) + " properties");
}

}  // namespace

const std::vector<Property>& property_registry() {
  static const std::vector<Property> registry{
      {"linalg.kron_vec_identity", kron_vec_identity},
      {"linalg.least_squares_orthogonality", least_squares_orthogonality},
      {"linalg.gauss_reproducible", gauss_reproducible},
      {"sr.normalization", sr_normalization},
      {"sr.gradient_check", sr_gradient_check},
      {"sr.gradient_bound", sr_gradient_bound},
      {"sr.residual_bound", sr_residual_bound},
      {"sr.lipschitz_log", sr_lipschitz_log},
      {"inner.stationary_at_tolerance", inner_stationary},
      {"inner.weight_scaling", inner_weight_scaling},
      {"inner.linear_consistent_residual", inner_linear_consistent},
      {"reweight.lift_equality_single", reweight_lift_single},
      {"reweight.lift_equality_multi", reweight_lift_multi},
      {"reweight.affine_in_bias", reweight_affine_in_bias},
      {"reweight.reg_zero_iff_conditions", reweight_reg_zero_iff},
      {"ricl.monotone_descent", ricl_monotone},
      {"ricl.stationarity", ricl_stationarity},
      {"ricl.meta_gradient_exact", ricl_meta_gradient_exact},
      {"ricl.lr_rule_monotone", ricl_lr_rule_monotone},
      {"laricl.gradient_check", laricl_gradient_check},
      {"laricl.monotone_descent", laricl_monotone},
      {"laricl.normal_equations", laricl_normal_equations},
      {"datagen.simplex_targets", datagen_simplex},
      {"datagen.deterministic", datagen_deterministic},
      {"datagen.target_norm_bound", datagen_norm_bound},
      {"bench.minmax_order", bench_minmax_order},
      {"bench.reproducible", bench_reproducible},
      {"bench.oracle_floor", bench_oracle_floor},
      {"cli.dataset_roundtrip", cli_dataset_roundtrip},
      {"cli.unique_property_names", cli_unique_names},
  };
  return registry;
}

std::vector<PropertyOutcome> run_properties(const PropertyContext& ctx, const std::string& filter) {
  std::vector<PropertyOutcome> out;
  for (const auto& p : property_registry()) {
    if (!filter.empty() && p.name.find(filter) == std::string::npos) continue;
    const auto start = std::chrono::steady_clock::now();
    PropertyOutcome o{p.name, {}, 0.0};
    try {
      o.result = p.check(ctx);
    } catch (const std::exception& e) {
      o.result = failed(std::string("threw: ") + e.what());
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace ricl
