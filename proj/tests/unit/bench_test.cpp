#include "ricl/bench.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "ricl/error.hpp"
#include "test_util.hpp"

namespace ricl {
namespace {

using testing::vec_of;

BenchSpec small_spec() {
  Preset p{"tiny", 4, 4, 6, 20, 20, 4.0};
  BenchSpec s = default_bench_spec(p, 3);
  s.seeds = 2;
  s.ricl.outer_steps = 5;
  s.laricl.outer_steps = 5;
  s.inner.max_steps = 100;
  return s;
}

std::string to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  write_bench_csv(out, rows);
  return out.str();
}

TEST(Mse, Examples) {
  EXPECT_EQ(mse(vec_of({1, 2}), vec_of({1, 2})), 0.0);
  EXPECT_EQ(mse(vec_of({0, 0}), vec_of({1, 1})), 1.0);
  EXPECT_EQ(mse(vec_of({1, 3}), vec_of({0, 1})), 2.5);
  EXPECT_THROW(mse(vec_of({1}), vec_of({1, 2})), Error);
}

TEST(MinmaxScale, Examples) {
  EXPECT_EQ(minmax_scale({2, 4, 6}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(minmax_scale({5, 5, 5}), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(minmax_scale({1, 3}), (std::vector<double>{0, 1}));
}

TEST(MinmaxScale, NanIsKeptAndIgnored) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto out = minmax_scale({1, nan, 3});
  EXPECT_EQ(out[0], 0.0);
  EXPECT_TRUE(std::isnan(out[1]));
  EXPECT_EQ(out[2], 1.0);
}

TEST(MinmaxScale, PreservesArgminAndArgmax) {
  RngStream rng(1, 0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v;
    for (int i = 0; i < 7; ++i) v.push_back(rng.uniform() * 10 - 5);
    const auto s = minmax_scale(v);
    EXPECT_EQ(std::min_element(s.begin(), s.end()) - s.begin(),
              std::min_element(v.begin(), v.end()) - v.begin());
    EXPECT_EQ(std::max_element(s.begin(), s.end()) - s.begin(),
              std::max_element(v.begin(), v.end()) - v.begin());
  }
}

TEST(RunBenchmark, RowsSortedScaledAndComplete) {
  const auto spec = small_spec();
  const auto rows = run_benchmark(spec);
  ASSERT_EQ(rows.size(), spec.cells.size() * spec.seeds * 4);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "ok") << r.method << " " << r.kind;
    EXPECT_GE(r.mse, 0.0);
    EXPECT_GE(r.mse_scaled, 0.0);
    EXPECT_LE(r.mse_scaled, 1.0);
  }
  EXPECT_EQ(rows[0].kind, "imbalanced");
  EXPECT_EQ(rows[0].method, "icl-uniform");
  EXPECT_EQ(rows[3].method, "oracle");
}

TEST(RunBenchmark, OutputIndependentOfJobs) {
  auto spec = small_spec();
  const auto serial = to_csv(run_benchmark(spec));
  spec.jobs = 4;
  EXPECT_EQ(to_csv(run_benchmark(spec)), serial);
  EXPECT_EQ(to_csv(run_benchmark(spec)), serial);
}

TEST(RunBenchmark, UnknownMethodRejected) {
  auto spec = small_spec();
  spec.methods = {"nope"};
  EXPECT_THROW(run_benchmark(spec), Error);
}

TEST(RunBenchmark, CleanUniformNearOracle) {
  auto spec = small_spec();
  spec.preset = preset("ci");
  spec.cells = {PrefixKind::random()};
  spec.methods = {"icl-uniform", "oracle"};
  spec.inner.max_steps = 500;
  spec.inner.project_radius = spec.preset.radius;
  const auto rows = run_benchmark(spec);
  for (std::size_t i = 0; i < rows.size(); i += 2) {
    EXPECT_LE(rows[i].mse, 1.1 * rows[i + 1].mse + 1e-10);
  }
}

TEST(RobustnessSweep, RowCount) {
  auto spec = small_spec();
  spec.methods = {"icl-uniform"};
  const auto rows = robustness_sweep(spec);
  EXPECT_EQ(rows.size(), 2u * 8u * 1u * spec.seeds);
}

TEST(BenchCsv, RoundTrip) {
  const auto rows = run_benchmark(small_spec());
  std::istringstream in(to_csv(rows));
  const auto back = read_bench_csv(in);
  EXPECT_EQ(to_csv(back), to_csv(rows));
}

TEST(BenchCsv, RejectsBadInput) {
  for (const std::string bad : {"method,kind\n", "method,kind,param,seed,mse,mse_scaled,status\na,b,1\n",
                                "method,kind,param,seed,mse,mse_scaled,status\na,b,x,1,1,1,ok\n",
                                "method,kind,param,seed,mse,mse_scaled,status\na,b,1,-1,1,1,ok\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(read_bench_csv(in), Error) << bad;
  }
}

TEST(Summarize, MeanAndSampleStd) {
  const std::vector<BenchRow> rows{
      {"ricl", "noisy", 0.8, 1, 1.0, 0.0, "ok"},
      {"ricl", "noisy", 0.8, 2, 3.0, 0.0, "ok"},
      {"ricl", "noisy", 0.8, 3, 0.0, 0.0, "SingularSystem"},
      {"oracle", "noisy", 0.8, 1, 2.0, 0.0, "ok"},
  };
  const auto s = summarize(rows);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].method, "ricl");
  EXPECT_EQ(s[0].count, 2u);
  EXPECT_DOUBLE_EQ(s[0].mse_mean, 2.0);
  EXPECT_DOUBLE_EQ(s[0].mse_std, std::sqrt(2.0));
  EXPECT_EQ(s[1].method, "oracle");
  EXPECT_EQ(s[1].mse_std, 0.0);
  std::ostringstream out;
  write_summary_csv(out, s);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "method,kind,param,seeds,mse_mean,mse_std");
}

}  // namespace
}  // namespace ricl
