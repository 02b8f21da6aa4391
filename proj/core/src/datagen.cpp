#include "ricl/datagen.hpp"

#include <cmath>

#include "ricl/error.hpp"
#include "ricl/softmax_regression.hpp"

namespace ricl {
namespace {

constexpr std::uint64_t kTaskStream = 1;
constexpr std::uint64_t kPrefixStream = 2;
constexpr std::uint64_t kValidStream = 3;
constexpr std::uint64_t kTestStream = 4;

}  // namespace

std::string PrefixKind::name() const {
  switch (variant) {
    case Variant::kRandom: return "random";
    case Variant::kImbalanced: return "imbalanced";
    case Variant::kNoisy: return "noisy";
    case Variant::kImbalancedNoisy: return "imbalanced-noisy";
  }
  return "random";
}

double PrefixKind::param() const {
  switch (variant) {
    case Variant::kRandom: return 0.0;
    case Variant::kImbalanced: return mean;
    case Variant::kNoisy:
    case Variant::kImbalancedNoisy: return std;
  }
  return 0.0;
}

PrefixKind PrefixKind::parse(const std::string& name, double param) {
  if (name == "random") return random();
  if (name == "imbalanced") return imbalanced(param);
  if (name == "noisy") return noisy(param);
  if (name == "imbalanced-noisy") return imbalanced_noisy(0.4, param);
  fail(ErrorKind::kPreconditionViolation, "unknown prefix kind '" + name + "'");
}

TaskSpec gen_task(Eigen::Index n, Eigen::Index d, Eigen::Index m, RngStream& rng) {
  require(n >= 1 && d >= 1 && m >= 1, ErrorKind::kPreconditionViolation,
          "gen_task: n, d and m must be >= 1");
  return {n, d, m, gauss_vector(d, rng)};
}

std::vector<Example> gen_examples(const PrefixKind& kind, const TaskSpec& task, RngStream& rng) {
  require(kind.std >= 0.0, ErrorKind::kPreconditionViolation, "prefix noise std must be >= 0");
  std::vector<Example> out(static_cast<std::size_t>(task.m));
  for (auto& e : out) {
    e.a = gauss_matrix(task.n, task.d, rng);
    if (kind.mean != 0.0) e.a.array() += kind.mean;
  }
  for (auto& e : out) {
    e.b = softmax_predict(e.a, task.x_true);
    if (kind.std != 0.0) e.b += kind.std * gauss_vector(task.n, rng);
  }
  return out;
}

std::vector<Example> gen_eval_set(std::size_t count, const TaskSpec& task, RngStream& rng) {
  require(count >= 1, ErrorKind::kPreconditionViolation, "gen_eval_set: count must be >= 1");
  std::vector<Example> out(count);
  for (auto& e : out) {
    e.a = gauss_matrix(task.n, task.d, rng);
    e.b = softmax_predict(e.a, task.x_true);
  }
  return out;
}

RobustnessGrid robustness_grid() {
  const std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
  return {grid, grid};
}

Preset preset(const std::string& name) {
  if (name == "ci") return {"ci", 8, 8, 20, 200, 200, 2.0 * std::sqrt(8.0)};
  if (name == "paper") return {"paper", 16, 16, 40, 4000, 4000, 2.0 * std::sqrt(16.0)};
  fail(ErrorKind::kPreconditionViolation, "unknown preset '" + name + "' (expected ci or paper)");
}

Dataset gen_dataset(std::uint64_t seed, const PrefixKind& kind, Eigen::Index n, Eigen::Index d,
                    Eigen::Index m, std::size_t valid_count, std::size_t test_count) {
  Dataset ds;
  ds.seed = seed;
  ds.kind = kind;
  RngStream task_rng(seed, kTaskStream);
  ds.task = gen_task(n, d, m, task_rng);
  RngStream prefix_rng(seed, kPrefixStream);
  ds.prefix = gen_examples(kind, ds.task, prefix_rng);
  RngStream valid_rng(seed, kValidStream);
  ds.validation = gen_eval_set(valid_count, ds.task, valid_rng);
  RngStream test_rng(seed, kTestStream);
  ds.test = gen_eval_set(test_count, ds.task, test_rng);
  return ds;
}

Dataset gen_dataset(std::uint64_t seed, const PrefixKind& kind, const Preset& p) {
  return gen_dataset(seed, kind, p.n, p.d, p.m, p.valid_count, p.test_count);
}

}  // namespace ricl
