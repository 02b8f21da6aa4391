// ricl: dataset generation, training, benchmarks, verification and plots.

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <string>

#include "commands.hpp"
#include "ricl/error.hpp"
#include "settings.hpp"

namespace {

using namespace ricl::cli;

std::string flag_name(std::string key) {
  if (key == "out_dir") return "--out,--out-dir";
  for (auto& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

struct Subcommand {
  const char* name;
  const char* help;
  Command bit;
};

constexpr Subcommand kSubcommands[] = {
    {"gen", "generate a dataset (dataset.txt, dataset.csv)", kGen},
    {"train-ricl", "learn prefix weights with RICL (ricl_trace.csv, ricl_weights.csv)", kTrainRicl},
    {"train-laricl", "learn weights under the linear model (laricl_trace.csv, laricl_weights.csv)",
     kTrainLaricl},
    {"bench", "method comparison (bench.csv, bench_summary.csv)", kBench},
    {"sweep", "robustness grids (sweep.csv, sweep_summary.csv)", kSweep},
    {"verify", "run the property suite; exit 0 only if every property passes", kVerify},
    {"plot", "render a bench CSV as SVG", kPlot},
};

int dispatch(Command cmd, const Settings& s) {
  switch (cmd) {
    case kGen: return cmd_gen(s, std::cout);
    case kTrainRicl: return cmd_train_ricl(s, std::cout);
    case kTrainLaricl: return cmd_train_laricl(s, std::cout);
    case kBench: return cmd_bench(s, std::cout);
    case kSweep: return cmd_sweep(s, std::cout);
    case kVerify: return cmd_verify(s, std::cout, std::cerr);
    case kPlot: return cmd_plot(s, std::cout);
    default: return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prefix reweighting for in-context learning as softmax regression.\n"
               "Settings resolve as flags > --config file > preset; out_dir defaults to $" +
                   std::string(kOutDirEnv) + ", then ./out.",
               "ricl"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  KeyValues flags;
  std::string config_path;
  Command chosen = kGen;
  CLI::App* chosen_app = &app;
  for (const auto& sub : kSubcommands) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    cmd->add_option("--config", config_path, "flat key = value file");
    for (const auto& k : key_table()) {
      if (!(k.commands & sub.bit)) continue;
      cmd->add_option_function<std::string>(
          flag_name(k.key), [&flags, key = k.key](const std::string& v) { flags[key] = v; },
          k.help);
    }
    cmd->callback([&chosen, &chosen_app, cmd, bit = sub.bit] {
      chosen = bit;
      chosen_app = cmd;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ricl: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    const KeyValues config = config_path.empty() ? KeyValues{} : read_config(config_path);
    return dispatch(chosen, Settings::resolve(config, flags));
  } catch (const UsageError& e) {
    std::cerr << "ricl: " << one_line(e.what()) << "\n\n" << chosen_app->help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ricl: " << one_line(e.what()) << '\n';
    return 1;
  }
}
