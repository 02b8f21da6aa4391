#pragma once

#include <iosfwd>

#include "settings.hpp"

namespace ricl::cli {

// Each command writes its artifacts under out_dir and a short report to `out`.
// Failures surface as ricl::Error (runtime) or UsageError.
int cmd_gen(const Settings& s, std::ostream& out);
int cmd_train_ricl(const Settings& s, std::ostream& out);
int cmd_train_laricl(const Settings& s, std::ostream& out);
int cmd_bench(const Settings& s, std::ostream& out);
int cmd_sweep(const Settings& s, std::ostream& out);
int cmd_verify(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_plot(const Settings& s, std::ostream& out);

}  // namespace ricl::cli
