#pragma once

// Structured reweighting of an assembled prefix: a per-row weight w (the
// diagonal of W) and a dense bias B of the prefix's shape, applied as
// W * prefix + B.

#include <optional>
#include <vector>

#include "ricl/inner_solver.hpp"

namespace ricl {

/// Examples plus their stacked layout [A_1; b_1^T; A_2; b_2^T; ...], shape m(n+1) x d.
struct Prefix {
  std::vector<Example> examples;
  Matrix assembled;

  Eigen::Index m() const { return static_cast<Eigen::Index>(examples.size()); }
  Eigen::Index n() const { return examples.empty() ? 0 : examples.front().a.rows(); }
  Eigen::Index d() const { return assembled.cols(); }
};

/// Requires square examples (n == d) so that b_i fits a prefix row.
Prefix assemble_prefix(const std::vector<Example>& examples);
std::vector<Example> decompose_prefix(const Matrix& assembled, Eigen::Index n);

struct ReweightParams {
  Vector w;  // m(n+1): per example [w_a_i (n), w_b_i]
  Matrix b;  // m(n+1) x d: per example [B_a_i (n x d); B_b_i^T]

  static ReweightParams identity(Eigen::Index m, Eigen::Index n, Eigen::Index d);

  Eigen::Index block(Eigen::Index i, Eigen::Index n) const { return i * (n + 1); }
  auto w_a(Eigen::Index i, Eigen::Index n) { return w.segment(block(i, n), n); }
  auto w_a(Eigen::Index i, Eigen::Index n) const { return w.segment(block(i, n), n); }
  double& w_b(Eigen::Index i, Eigen::Index n) { return w(block(i, n) + n); }
  double w_b(Eigen::Index i, Eigen::Index n) const { return w(block(i, n) + n); }
  auto b_a(Eigen::Index i, Eigen::Index n) { return b.middleRows(block(i, n), n); }
  auto b_a(Eigen::Index i, Eigen::Index n) const { return b.middleRows(block(i, n), n); }
  auto b_b(Eigen::Index i, Eigen::Index n) { return b.row(block(i, n) + n).transpose(); }
  auto b_b(Eigen::Index i, Eigen::Index n) const { return b.row(block(i, n) + n).transpose(); }
};

/// diag(w) * assembled + B, decomposed back into examples.
Prefix apply_reweight(const Prefix& prefix, const ReweightParams& params);

/// The same transform computed pair by pair:
/// (diag(w_a_i) A_i + B_a_i, w_b_i b_i + B_b_i).
std::vector<Example> apply_reweight_pairs(const std::vector<Example>& examples,
                                          const ReweightParams& params);

/// Target that the bias on each b row is expressed against.
///
/// kData uses b_i: B_b_i = (sqrt(w_i) - 1) b_i, the form printed with the
/// equivalence construction. It reproduces the weighted loss only when
/// w_i is 0 or 1.
/// kPrediction uses f(A_i x) at a fixed anchor x: B_b_i = (1 - sqrt(w_i)) f(A_i x)
/// gives f(A_i x) - b~_i = sqrt(w_i) (f(A_i x) - b_i), so the transformer
/// loss equals the weighted loss exactly at that x.
enum class LiftAnchor { kData, kPrediction };

struct LiftOptions {
  LiftAnchor anchor = LiftAnchor::kData;
  std::optional<Vector> x;  // required for kPrediction
};

/// Row weights and biases that realise scalar per-example weights: w_a = 1,
/// B_a = 0, w_b = sqrt(w_i), B_b from the anchor. Throws kNegativeWeight on
/// any w_i < 0.
ReweightParams lift_scalar_weights(const Vector& w_softmax, const std::vector<Example>& examples,
                                   const LiftOptions& opts = {});

/// sum_i ||f(A~_i x) - b~_i||^2 over the reweighted pairs.
double transformer_loss(const Vector& x, const std::vector<Example>& examples,
                        const ReweightParams& params);

struct RegConfig {
  double gamma = 0.0;
  LiftOptions anchor;
};

/// gamma * sum_i (||diag(w_a_i) A_i + B_a_i - A_i||_F^2 + ||B_b_i - t_i||^2),
/// where t_i is the bias the lift would assign for the current w_b_i:
/// (w_b_i - 1) b_i for the data anchor, (1 - w_b_i) f(A_i x) for the prediction
/// anchor. Zero exactly when every block satisfies the lift conditions.
double reg_term(const ReweightParams& params, const std::vector<Example>& examples,
                const RegConfig& cfg);

/// Gradient of reg_term with respect to (w, B), in ReweightParams layout.
ReweightParams reg_term_gradient(const ReweightParams& params,
                                 const std::vector<Example>& examples, const RegConfig& cfg);

}  // namespace ricl
