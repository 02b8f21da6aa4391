#pragma once

// Static SVG line chart of bench results: x = param, y = mean metric over
// seeds, one series per method.

#include <iosfwd>
#include <string>
#include <vector>

#include "ricl/bench.hpp"

namespace ricl {

struct PlotSpec {
  std::string kind;                  // empty: every kind in the input
  std::string metric = "mse";        // mse | mse_scaled
  std::vector<std::string> methods;  // empty: every method in the input
  std::string title;
  bool log_y = false;
  int width = 640;
  int height = 400;
};

/// Throws kEmptySeries when no ok row survives the filter and kSchemaError
/// for an unknown metric. Output bytes depend only on the rows and the spec.
void emit_plot(std::ostream& out, const std::vector<BenchRow>& rows, const PlotSpec& spec);

/// Reads a bench CSV from csv_path and writes the SVG to svg_path.
void emit_plot(const std::string& csv_path, const std::string& svg_path, const PlotSpec& spec);

}  // namespace ricl
