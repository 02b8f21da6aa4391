#include "ricl/reweight.hpp"

#include <cmath>
#include <string>

#include "ricl/error.hpp"
#include "ricl/softmax_regression.hpp"

namespace ricl {
namespace {

void check_square(const std::vector<Example>& examples) {
  require(!examples.empty(), ErrorKind::kShapeMismatch, "prefix has no examples");
  const auto n = examples.front().a.rows();
  for (const auto& e : examples) {
    require(e.a.rows() == n && e.a.cols() == n && e.b.size() == n, ErrorKind::kShapeMismatch,
            "prefix layout needs square examples with n == d, got A " +
                std::to_string(e.a.rows()) + "x" + std::to_string(e.a.cols()) + " and b of " +
                std::to_string(e.b.size()));
  }
}

void check_params(const std::vector<Example>& examples, const ReweightParams& params) {
  const auto rows = weight_length(examples);
  const auto d = examples.front().a.cols();
  require(params.w.size() == rows && params.b.rows() == rows && params.b.cols() == d,
          ErrorKind::kShapeMismatch, "reweight params do not match the prefix shape");
}

Vector anchor_target(const Example& e, const LiftOptions& opts) {
  if (opts.anchor == LiftAnchor::kData) return e.b;
  require(opts.x.has_value(), ErrorKind::kPreconditionViolation,
          "prediction anchor needs an anchor point x");
  return softmax_predict(e.a, *opts.x);
}

}  // namespace

Prefix assemble_prefix(const std::vector<Example>& examples) {
  check_square(examples);
  const auto n = examples.front().a.rows();
  Prefix p;
  p.examples = examples;
  p.assembled.resize(static_cast<Eigen::Index>(examples.size()) * (n + 1), n);
  Eigen::Index row = 0;
  for (const auto& e : examples) {
    p.assembled.middleRows(row, n) = e.a;
    p.assembled.row(row + n) = e.b.transpose();
    row += n + 1;
  }
  return p;
}

std::vector<Example> decompose_prefix(const Matrix& assembled, Eigen::Index n) {
  require(n >= 1 && assembled.rows() % (n + 1) == 0, ErrorKind::kShapeMismatch,
          "assembled prefix rows are not a multiple of n + 1");
  std::vector<Example> out;
  for (Eigen::Index row = 0; row < assembled.rows(); row += n + 1) {
    out.push_back({assembled.middleRows(row, n), assembled.row(row + n).transpose()});
  }
  return out;
}

ReweightParams ReweightParams::identity(Eigen::Index m, Eigen::Index n, Eigen::Index d) {
  return {Vector::Ones(m * (n + 1)), Matrix::Zero(m * (n + 1), d)};
}

Prefix apply_reweight(const Prefix& prefix, const ReweightParams& params) {
  check_params(prefix.examples, params);
  Prefix out;
  out.assembled = params.w.asDiagonal() * prefix.assembled + params.b;
  out.examples = decompose_prefix(out.assembled, prefix.n());
  return out;
}

std::vector<Example> apply_reweight_pairs(const std::vector<Example>& examples,
                                          const ReweightParams& params) {
  require(!examples.empty(), ErrorKind::kShapeMismatch, "prefix has no examples");
  check_params(examples, params);
  const auto n = examples.front().a.rows();
  std::vector<Example> out;
  out.reserve(examples.size());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(examples.size()); ++i) {
    const auto& e = examples[static_cast<std::size_t>(i)];
    require(e.a.rows() == n, ErrorKind::kShapeMismatch, "examples disagree on n");
    Matrix a = params.w_a(i, n).asDiagonal() * e.a + params.b_a(i, n);
    Vector b = params.w_b(i, n) * e.b + params.b_b(i, n);
    out.push_back({std::move(a), std::move(b)});
  }
  return out;
}

ReweightParams lift_scalar_weights(const Vector& w_softmax, const std::vector<Example>& examples,
                                   const LiftOptions& opts) {
  require(!examples.empty(), ErrorKind::kShapeMismatch, "prefix has no examples");
  require(w_softmax.size() == static_cast<Eigen::Index>(examples.size()),
          ErrorKind::kShapeMismatch, "lift: w.len != m");
  for (Eigen::Index i = 0; i < w_softmax.size(); ++i) {
    require(w_softmax(i) >= 0.0, ErrorKind::kNegativeWeight,
            "lift: weight " + std::to_string(i) + " is negative (" +
                std::to_string(w_softmax(i)) + ")");
  }
  const auto n = examples.front().a.rows();
  const auto d = examples.front().a.cols();
  auto params = ReweightParams::identity(w_softmax.size(), n, d);
  for (Eigen::Index i = 0; i < w_softmax.size(); ++i) {
    const double root = std::sqrt(w_softmax(i));
    const auto& e = examples[static_cast<std::size_t>(i)];
    params.w_b(i, n) = root;
    if (opts.anchor == LiftAnchor::kData) {
      params.b_b(i, n) = (root - 1.0) * e.b;
    } else {
      params.b_b(i, n) = (1.0 - root) * anchor_target(e, opts);
    }
  }
  return params;
}

double transformer_loss(const Vector& x, const std::vector<Example>& examples,
                        const ReweightParams& params) {
  double total = 0.0;
  for (const auto& e : apply_reweight_pairs(examples, params)) {
    total += 2.0 * sr_loss(e.a, e.b, x);
  }
  return total;
}

double reg_term(const ReweightParams& params, const std::vector<Example>& examples,
                const RegConfig& cfg) {
  require(!examples.empty(), ErrorKind::kShapeMismatch, "prefix has no examples");
  check_params(examples, params);
  if (cfg.gamma == 0.0) return 0.0;
  const auto n = examples.front().a.rows();
  const double sign = cfg.anchor.anchor == LiftAnchor::kData ? 1.0 : -1.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(examples.size()); ++i) {
    const auto& e = examples[static_cast<std::size_t>(i)];
    const Matrix da = params.w_a(i, n).asDiagonal() * e.a + params.b_a(i, n) - e.a;
    const Vector target = sign * (params.w_b(i, n) - 1.0) * anchor_target(e, cfg.anchor);
    total += da.squaredNorm() + (params.b_b(i, n) - target).squaredNorm();
  }
  return cfg.gamma * total;
}

ReweightParams reg_term_gradient(const ReweightParams& params,
                                 const std::vector<Example>& examples, const RegConfig& cfg) {
  require(!examples.empty(), ErrorKind::kShapeMismatch, "prefix has no examples");
  check_params(examples, params);
  const auto n = examples.front().a.rows();
  ReweightParams g{Vector::Zero(params.w.size()), Matrix::Zero(params.b.rows(), params.b.cols())};
  if (cfg.gamma == 0.0) return g;
  const double sign = cfg.anchor.anchor == LiftAnchor::kData ? 1.0 : -1.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(examples.size()); ++i) {
    const auto& e = examples[static_cast<std::size_t>(i)];
    const Matrix da = params.w_a(i, n).asDiagonal() * e.a + params.b_a(i, n) - e.a;
    const Vector t = sign * anchor_target(e, cfg.anchor);
    const Vector db = params.b_b(i, n) - (params.w_b(i, n) - 1.0) * t;
    g.w_a(i, n) = 2.0 * cfg.gamma * da.cwiseProduct(e.a).rowwise().sum();
    g.b_a(i, n) = 2.0 * cfg.gamma * da;
    g.w_b(i, n) = -2.0 * cfg.gamma * t.dot(db);
    g.b_b(i, n) = 2.0 * cfg.gamma * db;
  }
  return g;
}

}  // namespace ricl
