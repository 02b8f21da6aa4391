#include "settings.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ricl/csv.hpp"
#include "ricl/error.hpp"

namespace ricl::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw UsageError("invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

}  // namespace

const std::vector<KeySpec>& key_table() {
  constexpr unsigned kData = kGen | kTrainRicl | kTrainLaricl;
  constexpr unsigned kRuns = kTrainRicl | kBench | kSweep;
  constexpr unsigned kLinear = kTrainLaricl | kBench | kSweep;
  constexpr unsigned kInner = kTrainRicl | kTrainLaricl | kBench | kSweep;
  static const std::vector<KeySpec> table{
      {"preset", "ci or paper", kAll & ~kPlot},
      {"seed", "master seed", kAll & ~kPlot},
      {"out_dir", "output directory", kAll},
      {"jobs", "worker threads; output does not depend on it", kBench | kSweep | kVerify},
      {"n", "rows per example (overrides the preset)", kData | kBench | kSweep},
      {"d", "columns per example (overrides the preset)", kData | kBench | kSweep},
      {"m", "prefix examples (overrides the preset)", kData | kBench | kSweep},
      {"valid_count", "validation set size (overrides the preset)", kData | kBench | kSweep},
      {"test_count", "test set size (overrides the preset)", kData | kBench | kSweep},
      {"radius", "inner projection radius (overrides the preset)", kInner},
      {"kind", "random, imbalanced, noisy or imbalanced-noisy", kData},
      {"param", "mean for imbalanced, std for the noisy kinds", kData},
      {"data", "dataset file written by gen (instead of generating)", kTrainRicl | kTrainLaricl},
      {"seeds", "seeds per cell", kBench | kSweep},
      {"methods", "comma list of icl-uniform, ricl, laricl, oracle", kBench | kSweep | kPlot},
      {"cells", "comma list of kind:param cells", kBench},
      {"mode", "scalar or transformer", kRuns},
      {"outer_steps", "RICL outer steps", kRuns},
      {"outer_lr", "RICL outer step size", kRuns},
      {"batch_size", "validation minibatch size, 0 for all", kRuns},
      {"gamma", "regularisation weight (transformer mode)", kRuns},
      {"meta_method", "osl, unrolled or fd", kRuns},
      {"eta", "surrogate inner step size", kRuns},
      {"unroll_steps", "surrogate steps for unrolled and fd", kRuns},
      {"fd_h", "finite-difference step for fd", kRuns},
      {"backtracking", "halve rejected outer steps (true or false)", kRuns | kLinear},
      {"max_backtracks", "halvings per outer step", kRuns | kLinear},
      {"weight_projection", "none or nonnegative", kRuns},
      {"init", "ones or gaussian", kRuns},
      {"inner_max_steps", "inner solver step budget", kInner},
      {"inner_step_size", "inner initial step size", kInner},
      {"inner_grad_tol", "inner stopping tolerance", kInner},
      {"inner_line_search", "inner backtracking line search (true or false)", kInner},
      {"laricl_outer_steps", "LARICL outer steps", kLinear},
      {"laricl_outer_lr", "LARICL outer step size", kLinear},
      {"ridge", "LARICL ridge", kLinear},
      {"ridge_fallback", "retry singular solves with a small ridge", kLinear},
      {"laricl_grad", "analytic or fd", kLinear},
      {"filter", "run properties whose name contains this", kVerify},
      {"input", "bench CSV to plot (default <out_dir>/bench.csv)", kPlot},
      {"output", "SVG path (default <out_dir>/plot.svg)", kPlot},
      {"plot_kind", "only rows of this kind", kPlot},
      {"metric", "mse or mse_scaled", kPlot},
      {"log_y", "logarithmic y axis (true or false)", kPlot},
      {"title", "plot title", kPlot},
  };
  return table;
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : key_table())
    if (k.key == key) return &k;
  return nullptr;
}

KeyValues parse_config(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto where = origin + ":" + std::to_string(lineno);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!find_key(key)) throw UsageError(where + ": unknown key '" + key + "'");
    if (!out.emplace(key, value).second) throw UsageError(where + ": duplicate key '" + key + "'");
  }
  return out;
}

KeyValues read_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIoError, "cannot read config file " + path);
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

Settings Settings::resolve(const KeyValues& config, const KeyValues& flags) {
  Settings s;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) s.values_["out_dir"] = env;
  for (const auto& [k, v] : config) s.values_[k] = v;
  for (const auto& [k, v] : flags) s.values_[k] = v;
  return s;
}

std::optional<std::string> Settings::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Settings::str(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

double Settings::real(const std::string& key, double fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  try {
    return parse_double(*v);
  } catch (const Error&) {
    bad_value(key, *v, "a number");
  }
}

std::uint64_t Settings::u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto end = v->data() + v->size();
  const auto r = std::from_chars(v->data(), end, out);
  if (v->empty() || r.ec != std::errc() || r.ptr != end) bad_value(key, *v, "an unsigned integer");
  return out;
}

std::size_t Settings::count(const std::string& key, std::size_t fallback) const {
  return static_cast<std::size_t>(u64(key, fallback));
}

bool Settings::flag(const std::string& key, bool fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad_value(key, *v, "true or false");
}

std::vector<std::string> Settings::list(const std::string& key) const {
  std::vector<std::string> out;
  const auto v = raw(key);
  if (!v) return out;
  std::stringstream in(*v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Preset Settings::preset() const {
  const auto name = str("preset", "ci");
  Preset p;
  try {
    p = ricl::preset(name);
  } catch (const Error&) {
    bad_value("preset", name, "ci or paper");
  }
  p.n = static_cast<Eigen::Index>(count("n", static_cast<std::size_t>(p.n)));
  p.d = static_cast<Eigen::Index>(count("d", static_cast<std::size_t>(p.d)));
  p.m = static_cast<Eigen::Index>(count("m", static_cast<std::size_t>(p.m)));
  p.valid_count = count("valid_count", p.valid_count);
  p.test_count = count("test_count", p.test_count);
  p.radius = real("radius", p.radius);
  if (p.n < 1 || p.d < 1 || p.m < 1 || p.valid_count < 1 || p.test_count < 1) {
    throw UsageError("n, d, m, valid_count and test_count must be >= 1");
  }
  return p;
}

}  // namespace ricl::cli
