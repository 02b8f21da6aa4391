#pragma once

// Benchmark cells: for every (prefix kind, seed) generate a dataset, fit each
// method, and report the test MSE of its predictions.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ricl/datagen.hpp"
#include "ricl/laricl.hpp"
#include "ricl/ricl.hpp"

namespace ricl {

/// (1/n) sum (pred - target)^2.
double mse(const Vector& pred, const Vector& target);

/// (v - min) / (max - min); all-equal input maps to zeros. NaN entries stay NaN
/// and are ignored when finding min and max.
std::vector<double> minmax_scale(const std::vector<double>& values);

/// Method names, in canonical order.
const std::vector<std::string>& bench_methods();

struct BenchSpec {
  Preset preset;
  std::vector<PrefixKind> cells;
  std::vector<std::string> methods = bench_methods();
  std::uint64_t master_seed = 1;
  std::size_t seeds = 5;
  std::size_t jobs = 1;
  InnerConfig inner;
  RiclConfig ricl;
  LariclConfig laricl;
};

/// Tuned defaults for a preset: the comparison cells random, noisy(0.8),
/// imbalanced(0.8) and imbalanced-noisy, inner projection at the preset
/// radius, backtracking outer loops.
BenchSpec default_bench_spec(const Preset& p, std::uint64_t master_seed);

struct BenchRow {
  std::string method;
  std::string kind;
  double param = 0.0;
  std::uint64_t seed = 0;
  double mse = 0.0;
  double mse_scaled = 0.0;
  std::string status = "ok";
};

/// Mean test MSE of predictions from x.
double test_mse(const std::vector<Example>& test, const Vector& x);

/// Fits one method on a dataset and returns its implicit parameter.
Vector fit_method(const std::string& method, const Dataset& ds, const BenchSpec& spec);

/// Runs every (cell, seed, method); rows are sorted by (kind, param, seed,
/// method) and min-max scaled per (kind, param) group. A failing method is
/// recorded with its error kind in status and mse = nan. Output does not
/// depend on spec.jobs.
std::vector<BenchRow> run_benchmark(const BenchSpec& spec);

/// run_benchmark over the imbalanced mean grid and the noisy std grid.
std::vector<BenchRow> robustness_sweep(BenchSpec spec);

/// Header `method,kind,param,seed,mse,mse_scaled,status`.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
/// Throws kSchemaError on a wrong header, field count or number.
std::vector<BenchRow> read_bench_csv(std::istream& in);

struct SummaryRow {
  std::string method;
  std::string kind;
  double param = 0.0;
  std::size_t count = 0;  // successful seeds
  double mse_mean = 0.0;
  double mse_std = 0.0;   // sample standard deviation, 0 for one seed
};
/// Per (kind, param, method) aggregation across seeds, in row order.
std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows);
/// Header `method,kind,param,seeds,mse_mean,mse_std`.
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace ricl
