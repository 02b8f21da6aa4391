#pragma once

// Outer loop that learns prefix weights by descending the validation loss of
// the in-context learner.
//
// Scalar mode learns one weight per example (ReweightParams::w has length m
// and ReweightParams::b is empty). Transformer mode learns the full row
// weights and bias over the assembled prefix and adds gamma * reg_term.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "ricl/reweight.hpp"

namespace ricl {

enum class RiclMode { kScalar, kTransformer };

/// Differentiates the batch loss at x+ = x_t - eta * grad_x(weighted prefix loss)(x_t).
struct OneStepLookahead {
  double eta = 1.0;
};
/// Differentiates through `steps` such gradient steps starting at x_t.
/// Unrolled{1, eta} is identical to OneStepLookahead{eta}.
struct Unrolled {
  std::size_t steps = 1;
  double eta = 1.0;
};
/// Central differences of the Unrolled{steps, eta} surrogate.
struct FiniteDifference {
  double h = 1e-5;
  std::size_t steps = 1;
  double eta = 1.0;
};
using MetaMethod = std::variant<OneStepLookahead, Unrolled, FiniteDifference>;

enum class WeightProjection { kNone, kNonNegative };
enum class WeightInit { kOnes, kGaussian };

struct RiclConfig {
  RiclMode mode = RiclMode::kScalar;
  std::size_t outer_steps = 60;
  double outer_lr = 1.0;
  InnerConfig inner;
  std::size_t batch_size = 0;  // 0 means the whole validation set
  double gamma = 0.0;          // transformer mode only
  MetaMethod meta_method = OneStepLookahead{};
  WeightProjection weight_projection = WeightProjection::kNone;
  // Scalar mode defaults to ones, transformer mode to standard normals.
  std::optional<WeightInit> init;
  // Halve the step (up to max_backtracks times) until the objective does
  // not increase; a step that never qualifies is skipped.
  bool backtracking = false;
  std::size_t max_backtracks = 12;
  std::uint64_t seed = 0;  // weight init and batch order
};

struct TraceRecord {
  std::size_t step = 0;
  double l_valid = 0.0;
  double grad_norm_sq = 0.0;
  double step_size = 0.0;
};
using TrainTrace = std::vector<TraceRecord>;

/// Header `step,l_valid,grad_norm_sq,step_size`, shortest round-trip floats.
void write_trace_csv(std::ostream& out, const TrainTrace& trace);

/// sum_v sr_loss(A_v, b_v, x) and its gradient.
double sum_loss(const std::vector<Example>& set, const Vector& x);
Vector sum_gradient(const std::vector<Example>& set, const Vector& x);

/// Inner solution for the current weights.
SolveResult inner_solution(RiclMode mode, const ReweightParams& params,
                           const std::vector<Example>& examples, const InnerConfig& inner);

/// Validation loss sum_v sr_loss(A_v, b_v, x*(params)).
double validation_loss(RiclMode mode, const ReweightParams& params,
                       const std::vector<Example>& examples, const std::vector<Example>& valset,
                       const InnerConfig& inner);
/// Scalar-mode shorthand.
double validation_loss(const Vector& w, const std::vector<Example>& examples,
                       const std::vector<Example>& valset, const InnerConfig& inner);

/// Batch loss after the method's surrogate steps from x_t.
double surrogate_loss(RiclMode mode, const ReweightParams& params, const Vector& x_t,
                      const std::vector<Example>& examples, const std::vector<Example>& batch,
                      std::size_t steps, double eta);

/// Gradient of the surrogate batch loss with respect to (w, B), in the layout
/// of `params`.
ReweightParams meta_gradient(RiclMode mode, const ReweightParams& params, const Vector& x_t,
                             const std::vector<Example>& examples,
                             const std::vector<Example>& batch, const MetaMethod& method);

struct RiclResult {
  ReweightParams params;
  Vector x_star;
  TrainTrace trace;
};

/// Runs outer_steps steps; the trace has outer_steps + 1 records. Throws
/// DivergenceError when the objective stops being finite.
RiclResult ricl_train(const std::vector<Example>& examples, const std::vector<Example>& valset,
                      const RiclConfig& cfg);

/// Initial weights for a run, as ricl_train would choose them.
ReweightParams ricl_initial_params(const std::vector<Example>& examples, const RiclConfig& cfg);

/// log of the largest step size the descent guarantee allows:
/// ln(2|B|) - (ln d + 2 ln n + 5 R^2) - 2 ln(4R). Throws kPreconditionViolation
/// unless R > 4.
double lr_rule(long n, long d, double radius, std::size_t batch_size);

struct ConvergenceStats {
  std::vector<double> min_grad_sq;  // min over records 0..T for each horizon T
  double c_fit = 0.0;               // max over horizons of min_grad_sq * sqrt(T)
};
ConvergenceStats convergence_stats(const TrainTrace& trace, const std::vector<std::size_t>& horizons);

}  // namespace ricl
