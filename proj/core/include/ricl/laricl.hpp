#pragma once

// Reweighting under the linear in-context model: the inner problem is the
// closed-form least-squares fit to the weighted aggregate of the prefix, and
// the weights are learned by gradient descent on the validation residual.

#include <variant>
#include <vector>

#include "ricl/ricl.hpp"

namespace ricl {

struct AnalyticGradient {};
struct CentralDifference {
  double h = 1e-5;
};
using LariclGradMethod = std::variant<AnalyticGradient, CentralDifference>;

struct LariclConfig {
  std::size_t outer_steps = 100;
  double outer_lr = 1e-2;
  double ridge = 0.0;
  bool ridge_fallback = false;
  LariclGradMethod grad_method = AnalyticGradient{};
  bool backtracking = false;
  std::size_t max_backtracks = 12;
};

struct LinearRidge {
  double ridge = 0.0;
  bool fallback = false;
};

/// sum_v ||A_v x(w) - b_v||^2 with x(w) the closed-form weighted solution.
double laricl_val_loss(const Vector& w_full, const std::vector<Example>& examples,
                       const std::vector<Example>& valset, const LinearRidge& ridge = {});

/// Gradient of laricl_val_loss with respect to w_full (length m(n+1)).
Vector laricl_grad(const Vector& w_full, const std::vector<Example>& examples,
                   const std::vector<Example>& valset, const LariclGradMethod& method = {},
                   const LinearRidge& ridge = {});

struct LariclResult {
  Vector w;
  Vector x;
  TrainTrace trace;
};

/// Starts from w = 1 and runs outer_steps gradient steps.
LariclResult laricl_train(const std::vector<Example>& examples,
                          const std::vector<Example>& valset, const LariclConfig& cfg);

}  // namespace ricl
