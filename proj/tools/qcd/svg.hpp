#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qcd/table.hpp"

namespace qcd::cli {

struct SeriesPoint {
  double x;  // log10 T
  double y;
};

struct Series {
  std::string label;
  std::string color;
  bool dashed = false;
  bool markers = false;
  std::vector<SeriesPoint> points;
};

/// Latency chart built from a summary table: per detector an empirical series
/// (solid, with markers) and an upper-bound series (dashed), plus one lower
/// bound series. Throws std::runtime_error naming a missing column.
std::vector<Series> latency_series(const TextTable& summary);

/// Self-contained SVG 1.1 line chart, x = log10 T.
void write_svg(const std::vector<Series>& series, const std::string& title, std::ostream& out);

}  // namespace qcd::cli
