#pragma once

// Synthetic in-context tasks: a hidden x_true, prefixes of corrupted
// examples, and clean validation/test sets.

#include <cstdint>
#include <string>
#include <vector>

#include "ricl/inner_solver.hpp"

namespace ricl {

struct TaskSpec {
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  Eigen::Index m = 0;
  Vector x_true;
};

struct PrefixKind {
  enum class Variant { kRandom, kImbalanced, kNoisy, kImbalancedNoisy };
  Variant variant = Variant::kRandom;
  double mean = 0.0;  // added to every entry of A_i
  double std = 0.0;   // standard deviation of the noise on b_i

  static PrefixKind random() { return {}; }
  static PrefixKind imbalanced(double mean) { return {Variant::kImbalanced, mean, 0.0}; }
  static PrefixKind noisy(double std) { return {Variant::kNoisy, 0.0, std}; }
  static PrefixKind imbalanced_noisy(double mean = 0.4, double std = 0.4) {
    return {Variant::kImbalancedNoisy, mean, std};
  }

  /// random | imbalanced | noisy | imbalanced-noisy
  std::string name() const;
  /// The swept parameter: std for noisy kinds, mean for imbalanced, 0 for random.
  double param() const;
  /// Inverse of (name, param); imbalanced-noisy keeps mean 0.4 with param as std.
  static PrefixKind parse(const std::string& name, double param);
};

TaskSpec gen_task(Eigen::Index n, Eigen::Index d, Eigen::Index m, RngStream& rng);

/// All A_i are drawn first (entries N(mean, 1)), then the noise on b_i, so
/// kinds sharing a stream share their draws.
std::vector<Example> gen_examples(const PrefixKind& kind, const TaskSpec& task, RngStream& rng);

/// Clean pairs with A ~ N(0, I) entries and b = softmax(A x_true).
std::vector<Example> gen_eval_set(std::size_t count, const TaskSpec& task, RngStream& rng);

struct RobustnessGrid {
  std::vector<double> means;
  std::vector<double> stds;
};
RobustnessGrid robustness_grid();

struct Preset {
  std::string name;
  Eigen::Index n = 8;
  Eigen::Index d = 8;
  Eigen::Index m = 20;
  std::size_t valid_count = 200;
  std::size_t test_count = 200;
  double radius = 0.0;  // inner projection radius
};
/// "ci" or "paper"; throws kPreconditionViolation otherwise.
Preset preset(const std::string& name);

struct Dataset {
  std::uint64_t seed = 0;
  PrefixKind kind;
  TaskSpec task;
  std::vector<Example> prefix;
  std::vector<Example> validation;
  std::vector<Example> test;
};

/// Everything for one cell, from fixed stream ids of `seed`: the task and
/// prefix streams do not depend on the kind, and validation and test have
/// their own streams.
Dataset gen_dataset(std::uint64_t seed, const PrefixKind& kind, Eigen::Index n, Eigen::Index d,
                    Eigen::Index m, std::size_t valid_count, std::size_t test_count);
Dataset gen_dataset(std::uint64_t seed, const PrefixKind& kind, const Preset& p);

}  // namespace ricl
