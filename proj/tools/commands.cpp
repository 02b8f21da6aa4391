#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ricl/bench.hpp"
#include "ricl/csv.hpp"
#include "ricl/dataset_io.hpp"
#include "ricl/error.hpp"
#include "ricl/plot.hpp"
#include "ricl/verify.hpp"

namespace ricl::cli {
namespace {

namespace fs = std::filesystem;

std::string output_path(const Settings& s, const std::string& name) {
  const fs::path dir = s.out_dir();
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::kIoError, "cannot create output directory " + dir.string());
  return (dir / name).string();
}

// Renders into memory first so a failed command leaves no partial file.
template <typename Fn>
void write_file(const std::string& path, Fn&& render) {
  std::ostringstream text;
  render(text);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIoError, "cannot open " + path + " for writing");
  out << text.str();
  out.close();
  require(static_cast<bool>(out), ErrorKind::kIoError, "write to " + path + " failed");
}

PrefixKind kind_of(const std::string& name, double param) {
  try {
    return PrefixKind::parse(name, param);
  } catch (const Error&) {
    throw UsageError("invalid kind '" + name +
                     "' (expected random, imbalanced, noisy or imbalanced-noisy)");
  }
}

PrefixKind data_kind(const Settings& s) {
  const auto name = s.str("kind", "noisy");
  return kind_of(name, s.real("param", name == "imbalanced-noisy" ? 0.4 : 0.8));
}

Dataset dataset(const Settings& s) {
  if (s.has("data")) return load_dataset(s.str("data", ""));
  return gen_dataset(s.u64("seed", 1), data_kind(s), s.preset());
}

InnerConfig inner_config(const Settings& s, InnerConfig c) {
  c.max_steps = s.count("inner_max_steps", c.max_steps);
  c.step_size = s.real("inner_step_size", c.step_size);
  c.grad_tol = s.real("inner_grad_tol", c.grad_tol);
  c.line_search = s.flag("inner_line_search", c.line_search);
  if (s.has("radius")) {
    const double r = s.real("radius", 0.0);
    c.project_radius = r > 0.0 ? std::optional<double>(r) : std::nullopt;
  }
  return c;
}

RiclConfig ricl_config(const Settings& s, RiclConfig c, const InnerConfig& inner) {
  c.inner = inner;
  const auto mode = s.str("mode", c.mode == RiclMode::kScalar ? "scalar" : "transformer");
  if (mode == "scalar") {
    c.mode = RiclMode::kScalar;
  } else if (mode == "transformer") {
    c.mode = RiclMode::kTransformer;
  } else {
    throw UsageError("invalid value '" + mode + "' for mode (expected scalar or transformer)");
  }
  c.outer_steps = s.count("outer_steps", c.outer_steps);
  c.outer_lr = s.real("outer_lr", c.outer_lr);
  c.batch_size = s.count("batch_size", c.batch_size);
  c.gamma = s.real("gamma", c.gamma);
  c.backtracking = s.flag("backtracking", c.backtracking);
  c.max_backtracks = s.count("max_backtracks", c.max_backtracks);

  const double eta = s.real("eta", 1.0);
  const auto steps = s.count("unroll_steps", 1);
  const auto method = s.str("meta_method", "osl");
  if (method == "osl") {
    c.meta_method = OneStepLookahead{eta};
  } else if (method == "unrolled") {
    c.meta_method = Unrolled{steps, eta};
  } else if (method == "fd") {
    c.meta_method = FiniteDifference{s.real("fd_h", 1e-5), steps, eta};
  } else {
    throw UsageError("invalid value '" + method + "' for meta_method (expected osl, unrolled or fd)");
  }

  const auto proj = s.str("weight_projection", "none");
  if (proj == "none") {
    c.weight_projection = WeightProjection::kNone;
  } else if (proj == "nonnegative") {
    c.weight_projection = WeightProjection::kNonNegative;
  } else {
    throw UsageError("invalid value '" + proj + "' for weight_projection (expected none or nonnegative)");
  }
  if (s.has("init")) {
    const auto init = s.str("init", "");
    if (init == "ones") {
      c.init = WeightInit::kOnes;
    } else if (init == "gaussian") {
      c.init = WeightInit::kGaussian;
    } else {
      throw UsageError("invalid value '" + init + "' for init (expected ones or gaussian)");
    }
  }
  return c;
}

LariclConfig laricl_config(const Settings& s, LariclConfig c) {
  c.outer_steps = s.count("laricl_outer_steps", c.outer_steps);
  c.outer_lr = s.real("laricl_outer_lr", c.outer_lr);
  c.ridge = s.real("ridge", c.ridge);
  c.ridge_fallback = s.flag("ridge_fallback", c.ridge_fallback);
  c.backtracking = s.flag("backtracking", c.backtracking);
  c.max_backtracks = s.count("max_backtracks", c.max_backtracks);
  const auto grad = s.str("laricl_grad", "analytic");
  if (grad == "analytic") {
    c.grad_method = AnalyticGradient{};
  } else if (grad == "fd") {
    c.grad_method = CentralDifference{s.real("fd_h", 1e-5)};
  } else {
    throw UsageError("invalid value '" + grad + "' for laricl_grad (expected analytic or fd)");
  }
  return c;
}

BenchSpec bench_spec(const Settings& s) {
  BenchSpec spec = default_bench_spec(s.preset(), s.u64("seed", 1));
  spec.seeds = s.count("seeds", spec.seeds);
  spec.jobs = s.count("jobs", 1);
  if (spec.jobs < 1) throw UsageError("jobs must be >= 1");
  if (s.has("methods")) {
    spec.methods = s.list("methods");
    for (const auto& m : spec.methods) {
      if (std::find(bench_methods().begin(), bench_methods().end(), m) == bench_methods().end()) {
        throw UsageError("unknown method '" + m + "'");
      }
    }
  }
  if (s.has("cells")) {
    spec.cells.clear();
    for (const auto& cell : s.list("cells")) {
      const auto colon = cell.find(':');
      const auto name = cell.substr(0, colon);
      double param = 0.0;
      if (colon != std::string::npos) {
        try {
          param = parse_double(cell.substr(colon + 1));
        } catch (const Error&) {
          throw UsageError("invalid cell '" + cell + "' (expected kind:param)");
        }
      }
      spec.cells.push_back(kind_of(name, param));
    }
  }
  spec.inner = inner_config(s, spec.inner);
  spec.ricl = ricl_config(s, spec.ricl, spec.inner);
  spec.laricl = laricl_config(s, spec.laricl);
  return spec;
}

void write_weights(std::ostream& out, const Vector& w) {
  out << "index,w\n";
  for (Eigen::Index i = 0; i < w.size(); ++i) out << i << ',' << format_double(w(i)) << '\n';
}

int finish_bench(const Settings& s, std::ostream& out, const std::vector<BenchRow>& rows,
                 const std::string& stem) {
  const auto csv = output_path(s, stem + ".csv");
  const auto summary_path = output_path(s, stem + "_summary.csv");
  write_file(csv, [&](std::ostream& o) { write_bench_csv(o, rows); });
  const auto summary = summarize(rows);
  write_file(summary_path, [&](std::ostream& o) { write_summary_csv(o, summary); });
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.status != "ok";
  out << rows.size() << " rows (" << failed << " failed) -> " << csv << '\n';
  for (const auto& r : summary) {
    out << "  " << r.kind << ' ' << format_double(r.param) << ' ' << r.method
        << " mse_mean=" << format_double(r.mse_mean) << '\n';
  }
  return 0;
}

}  // namespace

int cmd_gen(const Settings& s, std::ostream& out) {
  const Dataset ds = gen_dataset(s.u64("seed", 1), data_kind(s), s.preset());
  const auto path = output_path(s, "dataset.txt");
  const auto csv = output_path(s, "dataset.csv");
  write_file(path, [&](std::ostream& o) { write_dataset(o, ds); });
  write_file(csv, [&](std::ostream& o) { write_dataset_csv(o, ds); });
  out << "dataset " << ds.kind.name() << ' ' << format_double(ds.kind.param()) << " seed "
      << ds.seed << " -> " << path << '\n';
  return 0;
}

int cmd_train_ricl(const Settings& s, std::ostream& out) {
  const Dataset ds = dataset(s);
  const BenchSpec defaults = default_bench_spec(s.preset(), ds.seed);
  const InnerConfig inner = inner_config(s, defaults.inner);
  RiclConfig cfg = ricl_config(s, defaults.ricl, inner);
  cfg.seed = ds.seed;
  const RiclResult res = ricl_train(ds.prefix, ds.validation, cfg);
  const auto trace = output_path(s, "ricl_trace.csv");
  write_file(trace, [&](std::ostream& o) { write_trace_csv(o, res.trace); });
  write_file(output_path(s, "ricl_weights.csv"), [&](std::ostream& o) { write_weights(o, res.params.w); });
  const double uniform = test_mse(ds.test, fit_method("icl-uniform", ds, defaults));
  out << "ricl l_valid " << format_double(res.trace.front().l_valid) << " -> "
      << format_double(res.trace.back().l_valid) << ", test mse "
      << format_double(test_mse(ds.test, res.x_star)) << " (uniform " << format_double(uniform)
      << ") -> " << trace << '\n';
  return 0;
}

int cmd_train_laricl(const Settings& s, std::ostream& out) {
  const Dataset ds = dataset(s);
  const LariclConfig cfg = laricl_config(s, default_bench_spec(s.preset(), ds.seed).laricl);
  const LariclResult res = laricl_train(ds.prefix, ds.validation, cfg);
  const auto trace = output_path(s, "laricl_trace.csv");
  write_file(trace, [&](std::ostream& o) { write_trace_csv(o, res.trace); });
  write_file(output_path(s, "laricl_weights.csv"), [&](std::ostream& o) { write_weights(o, res.w); });
  out << "laricl l_valid " << format_double(res.trace.front().l_valid) << " -> "
      << format_double(res.trace.back().l_valid) << " -> " << trace << '\n';
  return 0;
}

int cmd_bench(const Settings& s, std::ostream& out) {
  return finish_bench(s, out, run_benchmark(bench_spec(s)), "bench");
}

int cmd_sweep(const Settings& s, std::ostream& out) {
  return finish_bench(s, out, robustness_sweep(bench_spec(s)), "sweep");
}

int cmd_verify(const Settings& s, std::ostream& out, std::ostream& err) {
  PropertyContext ctx;
  ctx.seed = s.u64("seed", 1);
  ctx.preset = s.preset();
  ctx.jobs = s.count("jobs", 1);
  const auto outcomes = run_properties(ctx, s.str("filter", ""));
  if (outcomes.empty()) throw UsageError("no property matches filter '" + s.str("filter", "") + "'");
  std::size_t failed = 0;
  for (const auto& o : outcomes) {
    failed += !o.result.pass;
    out << (o.result.pass ? "PASS " : "FAIL ") << o.name << "  " << o.result.detail << '\n';
  }
  write_file(output_path(s, "verify.csv"), [&](std::ostream& o) {
    o << "property,pass,detail\n";
    for (const auto& r : outcomes) {
      o << r.name << ',' << (r.result.pass ? "true" : "false") << ",\"" << r.result.detail << "\"\n";
    }
  });
  if (failed > 0) {
    err << "ricl: verify: " << failed << " of " << outcomes.size() << " properties failed\n";
    return 1;
  }
  out << outcomes.size() << " properties passed\n";
  return 0;
}

int cmd_plot(const Settings& s, std::ostream& out) {
  PlotSpec spec;
  spec.kind = s.str("plot_kind", "");
  spec.metric = s.str("metric", "mse");
  spec.methods = s.list("methods");
  spec.title = s.str("title", "");
  spec.log_y = s.flag("log_y", false);
  const auto input = s.has("input") ? s.str("input", "") : output_path(s, "bench.csv");
  const auto output = s.has("output") ? s.str("output", "") : output_path(s, "plot.svg");
  emit_plot(input, output, spec);
  out << "plot -> " << output << '\n';
  return 0;
}

}  // namespace ricl::cli
