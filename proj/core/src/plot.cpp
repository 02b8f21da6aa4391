#include "ricl/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "ricl/error.hpp"

namespace ricl {
namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c",
                                              "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void emit_plot(std::ostream& out, const std::vector<BenchRow>& rows, const PlotSpec& spec) {
  require(spec.metric == "mse" || spec.metric == "mse_scaled", ErrorKind::kSchemaError,
          "plot: unknown metric '" + spec.metric + "'");
  require(spec.width >= 200 && spec.height >= 150, ErrorKind::kPreconditionViolation,
          "plot: canvas too small");

  // method -> param -> (sum, count), methods kept in first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::pair<double, int>>> series;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    if (!spec.kind.empty() && r.kind != spec.kind) continue;
    if (!spec.methods.empty() &&
        std::find(spec.methods.begin(), spec.methods.end(), r.method) == spec.methods.end())
      continue;
    double y = spec.metric == "mse" ? r.mse : r.mse_scaled;
    if (spec.log_y) {
      if (!(y > 0.0)) continue;
      y = std::log10(y);
    }
    if (!std::isfinite(y)) continue;
    if (!series.count(r.method)) order.push_back(r.method);
    auto& cell = series[r.method][r.param];
    cell.first += y;
    cell.second += 1;
  }
  require(!series.empty(), ErrorKind::kEmptySeries, "plot: no rows match the filter");

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& [method, pts] : series) {
    for (const auto& [x, acc] : pts) {
      const double y = acc.first / acc.second;
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi == x_lo) { x_lo -= 0.5; x_hi += 0.5; }
  if (y_hi == y_lo) {
    const double pad = y_lo == 0.0 ? 1.0 : 0.1 * std::abs(y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  const double left = 70, right = 150, top = 40, bottom = 50;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string title =
      spec.title.empty() ? (spec.kind.empty() ? spec.metric : spec.kind + " " + spec.metric)
                         : spec.title;
  out << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << escape(title) << "</text>\n";

  // Axes and ticks.
  out << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  out << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top + ph) << "\" x2=\""
      << fixed(left + pw) << "\" y2=\"" << fixed(top + ph) << "\"/>\n";
  out << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(left)
      << "\" y2=\"" << fixed(top + ph) << "\"/>\n";
  out << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  constexpr int kTicks = 5;
  for (int k = 0; k < kTicks; ++k) {
    const double fx = x_lo + (x_hi - x_lo) * k / (kTicks - 1);
    const double fy = y_lo + (y_hi - y_lo) * k / (kTicks - 1);
    out << "<line x1=\"" << fixed(sx(fx)) << "\" y1=\"" << fixed(top + ph) << "\" x2=\""
        << fixed(sx(fx)) << "\" y2=\"" << fixed(top + ph + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fixed(sx(fx)) << "\" y=\"" << fixed(top + ph + 18)
        << "\" text-anchor=\"middle\">" << tick_label(fx) << "</text>\n";
    out << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(sy(fy)) << "\" x2=\""
        << fixed(left) << "\" y2=\"" << fixed(sy(fy)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(sy(fy) + 4)
        << "\" text-anchor=\"end\">" << tick_label(spec.log_y ? std::pow(10.0, fy) : fy)
        << "</text>\n";
  }
  out << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(spec.height - 10.0)
      << "\" text-anchor=\"middle\">param</text>\n";
  out << "<text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 16 " << fixed(top + ph / 2) << ")\">"
      << escape(spec.metric) << (spec.log_y ? " (log)" : "") << "</text>\n";
  out << "</g>\n";

  for (std::size_t s = 0; s < order.size(); ++s) {
    const auto& pts = series[order[s]];
    const char* color = kPalette[s % kPalette.size()];
    out << "<g stroke=\"" << color << "\" fill=\"" << color << "\">\n";
    if (pts.size() > 1) {
      out << "<polyline fill=\"none\" stroke-width=\"2\" points=\"";
      bool first = true;
      for (const auto& [x, acc] : pts) {
        out << (first ? "" : " ") << fixed(sx(x)) << ',' << fixed(sy(acc.first / acc.second));
        first = false;
      }
      out << "\"/>\n";
    }
    for (const auto& [x, acc] : pts) {
      out << "<circle cx=\"" << fixed(sx(x)) << "\" cy=\"" << fixed(sy(acc.first / acc.second))
          << "\" r=\"3\"/>\n";
    }
    const double ly = top + 10 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << fixed(left + pw + 15) << "\" y1=\"" << fixed(ly) << "\" x2=\""
        << fixed(left + pw + 35) << "\" y2=\"" << fixed(ly) << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fixed(left + pw + 40) << "\" y=\"" << fixed(ly + 4)
        << "\" stroke=\"none\" fill=\"black\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(order[s]) << "</text>\n";
    out << "</g>\n";
  }
  out << "</svg>\n";
}

void emit_plot(const std::string& csv_path, const std::string& svg_path, const PlotSpec& spec) {
  std::ifstream in(csv_path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIoError, "cannot open " + csv_path);
  // Render first so a failed plot leaves no partial file behind.
  std::ostringstream svg;
  emit_plot(svg, read_bench_csv(in), spec);
  std::ofstream out(svg_path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIoError, "cannot open " + svg_path + " for writing");
  out << svg.str();
  require(static_cast<bool>(out), ErrorKind::kIoError, "write to " + svg_path + " failed");
}

}  // namespace ricl
