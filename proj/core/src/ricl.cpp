#include "ricl/ricl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "ricl/csv.hpp"
#include "ricl/error.hpp"
#include "ricl/softmax_regression.hpp"

namespace ricl {
namespace {

constexpr std::uint64_t kInitStream = 0x1d;
constexpr std::uint64_t kBatchStream = 0xba;

Eigen::Index m_of(const std::vector<Example>& examples) {
  return static_cast<Eigen::Index>(examples.size());
}

void check_params(RiclMode mode, const ReweightParams& params,
                  const std::vector<Example>& examples) {
  require(!examples.empty(), ErrorKind::kShapeMismatch, "prefix has no examples");
  if (mode == RiclMode::kScalar) {
    require(params.w.size() == m_of(examples), ErrorKind::kShapeMismatch,
            "scalar mode: w.len != m");
  } else {
    require(params.w.size() == weight_length(examples) &&
                params.b.rows() == weight_length(examples),
            ErrorKind::kShapeMismatch, "transformer mode: params do not match the prefix");
  }
}

// Examples and per-example weights the inner objective is built from.
struct InnerProblem {
  std::vector<Example> examples;
  Vector w;
};

InnerProblem inner_problem(RiclMode mode, const ReweightParams& params,
                           const std::vector<Example>& examples) {
  check_params(mode, params, examples);
  if (mode == RiclMode::kScalar) return {examples, params.w};
  return {apply_reweight_pairs(examples, params), Vector::Ones(m_of(examples))};
}

ReweightParams zeros_like(const ReweightParams& p) {
  return {Vector::Zero(p.w.size()), Matrix::Zero(p.b.rows(), p.b.cols())};
}

double squared_norm(const ReweightParams& p) { return p.w.squaredNorm() + p.b.squaredNorm(); }

void axpy(ReweightParams& y, double a, const ReweightParams& x) {
  y.w += a * x.w;
  if (y.b.size() > 0) y.b += a * x.b;
}

// Forward iterates x_0 = x_t, ..., x_K of the unrolled surrogate.
std::vector<Vector> unroll(const InnerProblem& prob, const Vector& x_t, std::size_t steps,
                           double eta) {
  std::vector<Vector> xs{x_t};
  Vector g;
  for (std::size_t k = 0; k < steps; ++k) {
    weighted_softmax_objective(prob.examples, prob.w, xs.back(), &g);
    xs.push_back(xs.back() - eta * g);
  }
  return xs;
}

ReweightParams analytic_meta_gradient(RiclMode mode, const ReweightParams& params,
                                      const Vector& x_t, const std::vector<Example>& examples,
                                      const std::vector<Example>& batch, std::size_t steps,
                                      double eta) {
  const auto prob = inner_problem(mode, params, examples);
  const auto xs = unroll(prob, x_t, steps, eta);
  ReweightParams grad = zeros_like(params);
  const auto n = examples.front().a.rows();
  const auto d = examples.front().a.cols();

  // Adjoint of the batch loss with respect to the current iterate.
  Vector adj = sum_gradient(batch, xs.back());
  for (std::size_t k = steps; k-- > 0;) {
    const Vector& x = xs[k];
    Vector hv = Vector::Zero(d);
    for (Eigen::Index i = 0; i < m_of(examples); ++i) {
      const auto& e = prob.examples[static_cast<std::size_t>(i)];
      if (mode == RiclMode::kScalar) {
        const double wi = prob.w(i);
        grad.w(i) -= eta * sr_gradient(e.a, e.b, x).dot(adj);
        if (wi != 0.0) hv += wi * sr_hessian_vector(e.a, e.b, x, adj);
      } else {
        const auto p = gradient_directional_partials(e.a, e.b, x, adj);
        const auto& orig = examples[static_cast<std::size_t>(i)];
        // d(loss)/d(A~) = -eta * p.d_a, d(loss)/d(b~) = -eta * p.d_b.
        grad.w_a(i, n) -= eta * p.d_a.cwiseProduct(orig.a).rowwise().sum();
        grad.b_a(i, n) -= eta * p.d_a;
        grad.w_b(i, n) -= eta * orig.b.dot(p.d_b);
        grad.b_b(i, n) -= eta * p.d_b;
        hv += p.d_x;
      }
    }
    adj -= eta * hv;
  }
  return grad;
}

ReweightParams fd_meta_gradient(RiclMode mode, const ReweightParams& params, const Vector& x_t,
                                const std::vector<Example>& examples,
                                const std::vector<Example>& batch, const FiniteDifference& fd) {
  require(fd.h > 0.0, ErrorKind::kPreconditionViolation, "finite difference: h must be > 0");
  ReweightParams grad = zeros_like(params);
  ReweightParams probe = params;
  auto f = [&] { return surrogate_loss(mode, probe, x_t, examples, batch, fd.steps, fd.eta); };
  for (Eigen::Index k = 0; k < params.w.size(); ++k) {
    probe.w(k) = params.w(k) + fd.h;
    const double up = f();
    probe.w(k) = params.w(k) - fd.h;
    const double down = f();
    probe.w(k) = params.w(k);
    grad.w(k) = (up - down) / (2.0 * fd.h);
  }
  for (Eigen::Index r = 0; r < params.b.rows(); ++r) {
    for (Eigen::Index c = 0; c < params.b.cols(); ++c) {
      probe.b(r, c) = params.b(r, c) + fd.h;
      const double up = f();
      probe.b(r, c) = params.b(r, c) - fd.h;
      const double down = f();
      probe.b(r, c) = params.b(r, c);
      grad.b(r, c) = (up - down) / (2.0 * fd.h);
    }
  }
  return grad;
}

// Deterministic epoch-wise shuffled minibatches over the validation set.
class BatchSchedule {
 public:
  BatchSchedule(const std::vector<Example>& valset, std::size_t batch_size, std::uint64_t seed)
      : valset_(valset), seed_(seed) {
    size_ = (batch_size == 0 || batch_size >= valset.size()) ? valset.size() : batch_size;
    order_.resize(valset.size());
  }

  std::vector<Example> next() {
    if (size_ == valset_.size()) return valset_;
    if (pos_ == 0 || pos_ + size_ > order_.size()) {
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      RngStream rng = RngStream(seed_, kBatchStream).derive(epoch_++);
      for (std::size_t i = order_.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        std::swap(order_[i - 1], order_[std::min(j, i - 1)]);
      }
      pos_ = 0;
    }
    std::vector<Example> batch;
    batch.reserve(size_);
    for (std::size_t k = 0; k < size_; ++k) batch.push_back(valset_[order_[pos_ + k]]);
    pos_ += size_;
    return batch;
  }

 private:
  const std::vector<Example>& valset_;
  std::uint64_t seed_;
  std::size_t size_ = 0;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::uint64_t epoch_ = 0;
};

}  // namespace

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  out << "step,l_valid,grad_norm_sq,step_size\n";
  for (const auto& r : trace) {
    out << r.step << ',' << format_double(r.l_valid) << ',' << format_double(r.grad_norm_sq)
        << ',' << format_double(r.step_size) << '\n';
  }
}

double sum_loss(const std::vector<Example>& set, const Vector& x) {
  double total = 0.0;
  for (const auto& e : set) total += sr_loss(e.a, e.b, x);
  return total;
}

Vector sum_gradient(const std::vector<Example>& set, const Vector& x) {
  Vector g = Vector::Zero(x.size());
  for (const auto& e : set) g += sr_gradient(e.a, e.b, x);
  return g;
}

SolveResult inner_solution(RiclMode mode, const ReweightParams& params,
                           const std::vector<Example>& examples, const InnerConfig& inner) {
  const auto prob = inner_problem(mode, params, examples);
  return solve_weighted_softmax(prob.examples, prob.w, inner);
}

double validation_loss(RiclMode mode, const ReweightParams& params,
                       const std::vector<Example>& examples, const std::vector<Example>& valset,
                       const InnerConfig& inner) {
  require(!valset.empty(), ErrorKind::kPreconditionViolation, "validation set is empty");
  return sum_loss(valset, inner_solution(mode, params, examples, inner).x_star);
}

double validation_loss(const Vector& w, const std::vector<Example>& examples,
                       const std::vector<Example>& valset, const InnerConfig& inner) {
  return validation_loss(RiclMode::kScalar, ReweightParams{w, Matrix()}, examples, valset, inner);
}

double surrogate_loss(RiclMode mode, const ReweightParams& params, const Vector& x_t,
                      const std::vector<Example>& examples, const std::vector<Example>& batch,
                      std::size_t steps, double eta) {
  const auto prob = inner_problem(mode, params, examples);
  return sum_loss(batch, unroll(prob, x_t, steps, eta).back());
}

ReweightParams meta_gradient(RiclMode mode, const ReweightParams& params, const Vector& x_t,
                             const std::vector<Example>& examples,
                             const std::vector<Example>& batch, const MetaMethod& method) {
  require(!batch.empty(), ErrorKind::kPreconditionViolation, "meta_gradient: empty batch");
  return std::visit(
      [&](const auto& m) -> ReweightParams {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, OneStepLookahead>) {
          return analytic_meta_gradient(mode, params, x_t, examples, batch, 1, m.eta);
        } else if constexpr (std::is_same_v<T, Unrolled>) {
          return analytic_meta_gradient(mode, params, x_t, examples, batch, m.steps, m.eta);
        } else {
          return fd_meta_gradient(mode, params, x_t, examples, batch, m);
        }
      },
      method);
}

ReweightParams ricl_initial_params(const std::vector<Example>& examples, const RiclConfig& cfg) {
  require(!examples.empty(), ErrorKind::kShapeMismatch, "prefix has no examples");
  const WeightInit init = cfg.init.value_or(
      cfg.mode == RiclMode::kScalar ? WeightInit::kOnes : WeightInit::kGaussian);
  const Eigen::Index len =
      cfg.mode == RiclMode::kScalar ? m_of(examples) : weight_length(examples);
  ReweightParams p;
  if (init == WeightInit::kOnes) {
    p.w = Vector::Ones(len);
  } else {
    RngStream rng(cfg.seed, kInitStream);
    p.w = gauss_vector(len, rng);
  }
  if (cfg.mode == RiclMode::kTransformer) {
    p.b = Matrix::Zero(len, examples.front().a.cols());
  }
  return p;
}

RiclResult ricl_train(const std::vector<Example>& examples, const std::vector<Example>& valset,
                      const RiclConfig& cfg) {
  require(cfg.outer_lr > 0.0, ErrorKind::kPreconditionViolation, "outer_lr must be > 0");
  require(!valset.empty(), ErrorKind::kPreconditionViolation, "validation set is empty");
  require(cfg.batch_size <= valset.size(), ErrorKind::kPreconditionViolation,
          "batch_size exceeds the validation set");
  if (cfg.mode == RiclMode::kTransformer) assemble_prefix(examples);  // checks n == d

  const RegConfig reg{cfg.gamma, {}};
  const bool with_reg = cfg.mode == RiclMode::kTransformer && cfg.gamma != 0.0;

  struct Point {
    ReweightParams params;
    Vector x;
    double objective;
  };
  auto evaluate = [&](ReweightParams params) {
    Vector x = inner_solution(cfg.mode, params, examples, cfg.inner).x_star;
    double obj = sum_loss(valset, x);
    if (with_reg) obj += reg_term(params, examples, reg);
    return Point{std::move(params), std::move(x), obj};
  };
  auto project = [&](ReweightParams& p) {
    if (cfg.weight_projection == WeightProjection::kNonNegative) p.w = p.w.cwiseMax(0.0);
  };

  ReweightParams start = ricl_initial_params(examples, cfg);
  project(start);
  Point cur = evaluate(std::move(start));
  if (!std::isfinite(cur.objective)) throw DivergenceError(0, "ricl: initial loss is not finite");

  BatchSchedule batches(valset, cfg.batch_size, cfg.seed);
  auto gradient_at = [&](const Point& p) {
    ReweightParams g = meta_gradient(cfg.mode, p.params, p.x, examples, batches.next(),
                                     cfg.meta_method);
    if (with_reg) axpy(g, 1.0, reg_term_gradient(p.params, examples, reg));
    return g;
  };

  RiclResult out;
  out.trace.reserve(cfg.outer_steps + 1);
  for (std::size_t t = 0; t < cfg.outer_steps; ++t) {
    const ReweightParams g = gradient_at(cur);
    const double gn2 = squared_norm(g);
    if (!std::isfinite(gn2)) {
      throw DivergenceError(t, "ricl: meta-gradient is not finite at step " + std::to_string(t));
    }
    double alpha = cfg.outer_lr;
    double taken = 0.0;
    const std::size_t tries = cfg.backtracking ? cfg.max_backtracks + 1 : 1;
    for (std::size_t k = 0; k < tries; ++k, alpha *= 0.5) {
      ReweightParams next = cur.params;
      axpy(next, -alpha, g);
      project(next);
      Point cand = evaluate(std::move(next));
      if (!cfg.backtracking) {
        if (!std::isfinite(cand.objective)) {
          throw DivergenceError(t + 1, "ricl: validation loss is not finite at step " +
                                           std::to_string(t + 1));
        }
      } else if (!(cand.objective <= cur.objective)) {
        continue;
      }
      out.trace.push_back({t, cur.objective, gn2, alpha});
      cur = std::move(cand);
      taken = alpha;
      break;
    }
    if (taken == 0.0) out.trace.push_back({t, cur.objective, gn2, 0.0});
  }
  out.trace.push_back({cfg.outer_steps, cur.objective, squared_norm(gradient_at(cur)), 0.0});
  out.params = std::move(cur.params);
  out.x_star = std::move(cur.x);
  return out;
}

double lr_rule(long n, long d, double radius, std::size_t batch_size) {
  require(batch_size >= 1, ErrorKind::kPreconditionViolation, "lr_rule: batch_size must be >= 1");
  const BoundReport b = theoretical_bounds(n, d, radius);
  return std::log(2.0 * static_cast<double>(batch_size)) - b.log_lipschitz -
         2.0 * std::log(b.grad_bound);
}

ConvergenceStats convergence_stats(const TrainTrace& trace,
                                   const std::vector<std::size_t>& horizons) {
  ConvergenceStats s;
  for (const auto horizon : horizons) {
    require(horizon < trace.size(), ErrorKind::kPreconditionViolation,
            "convergence_stats: horizon " + std::to_string(horizon) + " exceeds the trace");
    double best = trace.front().grad_norm_sq;
    for (std::size_t t = 1; t <= horizon; ++t) best = std::min(best, trace[t].grad_norm_sq);
    s.min_grad_sq.push_back(best);
    s.c_fit = std::max(s.c_fit, best * std::sqrt(static_cast<double>(horizon)));
  }
  return s;
}

}  // namespace ricl
