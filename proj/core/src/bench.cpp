#include "ricl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <thread>
#include <tuple>

#include "ricl/csv.hpp"
#include "ricl/error.hpp"

namespace ricl {
namespace {

std::size_t method_rank(const std::string& m) {
  const auto& all = bench_methods();
  return static_cast<std::size_t>(std::find(all.begin(), all.end(), m) - all.begin());
}

bool row_less(const BenchRow& a, const BenchRow& b) {
  return std::make_tuple(a.kind, a.param, a.seed, method_rank(a.method), a.method) <
         std::make_tuple(b.kind, b.param, b.seed, method_rank(b.method), b.method);
}

}  // namespace

double mse(const Vector& pred, const Vector& target) {
  require(pred.size() == target.size(), ErrorKind::kShapeMismatch,
          "mse: lengths differ (" + std::to_string(pred.size()) + " vs " +
              std::to_string(target.size()) + ")");
  require(pred.size() > 0, ErrorKind::kShapeMismatch, "mse: empty vectors");
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

std::vector<double> minmax_scale(const std::vector<double>& values) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const double v : values) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const double v : values) {
    if (std::isnan(v)) {
      out.push_back(v);
    } else {
      out.push_back(hi > lo ? (v - lo) / (hi - lo) : 0.0);
    }
  }
  return out;
}

const std::vector<std::string>& bench_methods() {
  static const std::vector<std::string> names{"icl-uniform", "ricl", "laricl", "oracle"};
  return names;
}

BenchSpec default_bench_spec(const Preset& p, std::uint64_t master_seed) {
  BenchSpec s;
  s.preset = p;
  s.master_seed = master_seed;
  s.cells = {PrefixKind::random(), PrefixKind::noisy(0.8), PrefixKind::imbalanced(0.8),
             PrefixKind::imbalanced_noisy()};
  s.inner.max_steps = 500;
  s.inner.grad_tol = 1e-9;
  s.inner.project_radius = p.radius;

  s.ricl.mode = RiclMode::kScalar;
  s.ricl.outer_steps = 60;
  s.ricl.outer_lr = 1.0;
  s.ricl.meta_method = OneStepLookahead{1.0};
  s.ricl.backtracking = true;
  s.ricl.inner = s.inner;

  s.laricl.outer_steps = 100;
  s.laricl.outer_lr = 1.0;
  s.laricl.ridge_fallback = true;
  s.laricl.backtracking = true;
  return s;
}

double test_mse(const std::vector<Example>& test, const Vector& x) {
  require(!test.empty(), ErrorKind::kPreconditionViolation, "test set is empty");
  double total = 0.0;
  for (const auto& e : test) total += mse(icl_predict(e.a, x), e.b);
  return total / static_cast<double>(test.size());
}

Vector fit_method(const std::string& method, const Dataset& ds, const BenchSpec& spec) {
  const auto m = static_cast<Eigen::Index>(ds.prefix.size());
  if (method == "icl-uniform") {
    return solve_weighted_softmax(ds.prefix, Vector::Ones(m), spec.inner).x_star;
  }
  if (method == "oracle") {
    const auto v = static_cast<Eigen::Index>(ds.validation.size());
    return solve_weighted_softmax(ds.validation, Vector::Ones(v), spec.inner).x_star;
  }
  if (method == "ricl") {
    RiclConfig cfg = spec.ricl;
    cfg.inner = spec.inner;
    cfg.seed = ds.seed;
    return ricl_train(ds.prefix, ds.validation, cfg).x_star;
  }
  if (method == "laricl") {
    // Learned row weights are carried over to the softmax learner as a
    // bias-free reweighting of the prefix.
    const Vector w = laricl_train(ds.prefix, ds.validation, spec.laricl).w;
    const ReweightParams params{w, Matrix::Zero(w.size(), ds.task.d)};
    const auto reweighted = apply_reweight_pairs(ds.prefix, params);
    return solve_weighted_softmax(reweighted, Vector::Ones(m), spec.inner).x_star;
  }
  fail(ErrorKind::kPreconditionViolation, "unknown method '" + method + "'");
}

std::vector<BenchRow> run_benchmark(const BenchSpec& spec) {
  for (const auto& m : spec.methods) {
    require(method_rank(m) < bench_methods().size(), ErrorKind::kPreconditionViolation,
            "unknown method '" + m + "'");
  }
  require(spec.jobs >= 1, ErrorKind::kPreconditionViolation, "jobs must be >= 1");

  struct Task {
    PrefixKind kind;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& kind : spec.cells)
    for (std::size_t s = 0; s < spec.seeds; ++s) tasks.push_back({kind, spec.master_seed + s});

  const std::size_t width = spec.methods.size();
  std::vector<BenchRow> rows(tasks.size() * width);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const auto& task = tasks[t];
      const Dataset ds = gen_dataset(task.seed, task.kind, spec.preset);
      for (std::size_t k = 0; k < width; ++k) {
        BenchRow& row = rows[t * width + k];
        row.method = spec.methods[k];
        row.kind = task.kind.name();
        row.param = task.kind.param();
        row.seed = task.seed;
        try {
          row.mse = test_mse(ds.test, fit_method(row.method, ds, spec));
          row.status = "ok";
        } catch (const Error& e) {
          row.mse = std::numeric_limits<double>::quiet_NaN();
          row.status = std::string(to_string(e.kind()));
        }
      }
    }
  };
  const std::size_t jobs = std::min(spec.jobs, std::max<std::size_t>(tasks.size(), 1));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::sort(rows.begin(), rows.end(), row_less);
  for (std::size_t lo = 0; lo < rows.size();) {
    std::size_t hi = lo;
    while (hi < rows.size() && rows[hi].kind == rows[lo].kind &&
           rows[hi].param == rows[lo].param)
      ++hi;
    std::vector<double> group;
    for (std::size_t i = lo; i < hi; ++i) group.push_back(rows[i].mse);
    const auto scaled = minmax_scale(group);
    for (std::size_t i = lo; i < hi; ++i) rows[i].mse_scaled = scaled[i - lo];
    lo = hi;
  }
  return rows;
}

std::vector<BenchRow> robustness_sweep(BenchSpec spec) {
  const auto grid = robustness_grid();
  spec.cells.clear();
  for (const double mean : grid.means) spec.cells.push_back(PrefixKind::imbalanced(mean));
  for (const double std : grid.stds) spec.cells.push_back(PrefixKind::noisy(std));
  return run_benchmark(spec);
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "method,kind,param,seed,mse,mse_scaled,status\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.kind << ',' << format_double(r.param) << ',' << r.seed << ','
        << format_double(r.mse) << ',' << format_double(r.mse_scaled) << ',' << r.status << '\n';
  }
}

std::vector<BenchRow> read_bench_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::kSchemaError,
          "bench csv: missing header");
  require(line == "method,kind,param,seed,mse,mse_scaled,status", ErrorKind::kSchemaError,
          "bench csv: unexpected header '" + line + "'");
  std::vector<BenchRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    require(f.size() == 7, ErrorKind::kSchemaError,
            "bench csv line " + std::to_string(lineno) + ": expected 7 fields");
    BenchRow r;
    r.method = std::string(f[0]);
    r.kind = std::string(f[1]);
    r.param = parse_double(f[2]);
    const auto seed_end = f[3].data() + f[3].size();
    const auto parsed = std::from_chars(f[3].data(), seed_end, r.seed);
    require(parsed.ec == std::errc() && parsed.ptr == seed_end && !f[3].empty(),
            ErrorKind::kSchemaError, "bench csv line " + std::to_string(lineno) + ": bad seed");
    r.mse = parse_double(f[4]);
    r.mse_scaled = parse_double(f[5]);
    r.status = std::string(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::tuple<std::string, double, std::size_t, std::string>, std::vector<double>> groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.kind, r.param, method_rank(r.method), r.method}];
    if (r.status == "ok") g.push_back(r.mse);
  }
  for (const auto& [key, vals] : groups) {
    SummaryRow s;
    s.kind = std::get<0>(key);
    s.param = std::get<1>(key);
    s.method = std::get<3>(key);
    s.count = vals.size();
    if (vals.empty()) {
      s.mse_mean = s.mse_std = std::numeric_limits<double>::quiet_NaN();
    } else {
      double sum = 0.0;
      for (const double v : vals) sum += v;
      s.mse_mean = sum / static_cast<double>(vals.size());
      double ss = 0.0;
      for (const double v : vals) ss += (v - s.mse_mean) * (v - s.mse_mean);
      s.mse_std = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "method,kind,param,seeds,mse_mean,mse_std\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.kind << ',' << format_double(r.param) << ',' << r.count << ','
        << format_double(r.mse_mean) << ',' << format_double(r.mse_std) << '\n';
  }
}

}  // namespace ricl
