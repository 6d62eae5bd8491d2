#include "qcd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace qcd::cli {
namespace {

constexpr double kWidth = 760;
constexpr double kHeight = 480;
constexpr double kLeft = 70;
constexpr double kRight = 200;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 2.5, 5.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::vector<Series> latency_series(const TextTable& summary) {
  std::size_t idx[5];
  const char* required[] = {"detector", "T", "empirical_latency", "lower_bound", "upper_bound"};
  for (int i = 0; i < 5; ++i) {
    const auto found = summary.find(required[i]);
    if (!found) {
      throw std::runtime_error(std::string("summary is missing column '") + required[i] + "'");
    }
    idx[i] = *found;
  }

  std::vector<std::string> order;
  std::map<std::string, std::vector<const std::vector<std::string>*>> by_detector;
  for (const auto& row : summary.rows) {
    const auto& name = row[idx[0]];
    if (!by_detector.count(name)) order.push_back(name);
    by_detector[name].push_back(&row);
  }

  std::vector<Series> series;
  Series lower{"lower bound", "#555555", true, false, {}};
  std::map<double, double> lower_points;
  for (std::size_t d = 0; d < order.size(); ++d) {
    const std::string color = kPalette[d % std::size(kPalette)];
    Series empirical{order[d], color, false, true, {}};
    Series upper{order[d] + " upper bound", color, true, false, {}};
    auto rows = by_detector[order[d]];
    std::sort(rows.begin(), rows.end(), [&](auto* a, auto* b) {
      return parse_number((*a)[idx[1]]).value_or(0) < parse_number((*b)[idx[1]]).value_or(0);
    });
    for (const auto* row : rows) {
      const auto horizon = parse_number((*row)[idx[1]]);
      if (!horizon || *horizon <= 0) continue;
      const double x = std::log10(*horizon);
      if (auto y = parse_number((*row)[idx[2]])) empirical.points.push_back({x, *y});
      if (auto y = parse_number((*row)[idx[4]])) upper.points.push_back({x, *y});
      if (auto y = parse_number((*row)[idx[3]])) lower_points.emplace(x, *y);
    }
    series.push_back(std::move(empirical));
    if (!upper.points.empty()) series.push_back(std::move(upper));
  }
  for (const auto& [x, y] : lower_points) lower.points.push_back({x, y});
  if (!lower.points.empty()) series.push_back(std::move(lower));
  return series;
}

void write_svg(const std::vector<Series>& series, const std::string& title, std::ostream& out) {
  double x_lo = INFINITY, x_hi = -INFINITY, y_hi = 0.0, y_lo = 0.0;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_hi = std::max(y_hi, p.y);
      y_lo = std::min(y_lo, p.y);
    }
  }
  if (!(x_lo <= x_hi)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (x_hi - x_lo < 1e-9) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi - y_lo < 1e-9) y_hi = y_lo + 1.0;
  const double y_step = nice_step(y_hi - y_lo);
  y_hi = std::ceil(y_hi * 1.05 / y_step) * y_step;
  y_lo = std::floor(y_lo / y_step) * y_step;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto sy = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << fixed(kLeft + plot_w / 2, 1) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title) << "</text>\n";

  // Axes and grid.
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  const double x_step = nice_step(x_hi - x_lo);
  for (double x = std::ceil(x_lo / x_step) * x_step; x <= x_hi + 1e-9; x += x_step) {
    out << "<line x1=\"" << fixed(sx(x)) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(sx(x))
        << "\" y2=\"" << fixed(kTop + plot_h) << "\" stroke=\"#e5e5e5\"/>\n"
        << "<text x=\"" << fixed(sx(x)) << "\" y=\"" << fixed(kTop + plot_h + 16)
        << "\" text-anchor=\"middle\">" << fixed(x) << "</text>\n";
  }
  for (double y = y_lo; y <= y_hi + 1e-9 * y_step; y += y_step) {
    out << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(sy(y)) << "\" x2=\""
        << fixed(kLeft + plot_w) << "\" y2=\"" << fixed(sy(y)) << "\" stroke=\"#e5e5e5\"/>\n"
        << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(sy(y) + 4)
        << "\" text-anchor=\"end\">" << fixed(y, y_step < 1 ? 2 : 0) << "</text>\n";
  }
  out << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\"" << fixed(plot_w)
      << "\" height=\"" << fixed(plot_h) << "\" fill=\"none\" stroke=\"#333\"/>\n"
      << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"" << fixed(kHeight - 18)
      << "\" text-anchor=\"middle\" font-size=\"13\">log10 T</text>\n"
      << "<text transform=\"translate(18," << fixed(kTop + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">latency (steps)</text>\n"
      << "</g>\n";

  for (const auto& s : series) {
    if (s.points.empty()) continue;
    out << "<polyline class=\"series\" data-label=\"" << escape(s.label) << "\" fill=\"none\" stroke=\""
        << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
        << " points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      out << (i ? " " : "") << fixed(sx(s.points[i].x)) << ',' << fixed(sy(s.points[i].y));
    }
    out << "\"/>\n";
    if (s.markers) {
      for (const auto& p : s.points) {
        out << "<circle cx=\"" << fixed(sx(p.x)) << "\" cy=\"" << fixed(sy(p.y))
            << "\" r=\"3.5\" fill=\"" << s.color << "\"/>\n";
      }
    }
  }

  // Legend.
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  double ly = kTop + 10;
  for (const auto& s : series) {
    const double lx = kLeft + plot_w + 16;
    out << "<line x1=\"" << fixed(lx) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(lx + 28)
        << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n"
        << "<text x=\"" << fixed(lx + 34) << "\" y=\"" << fixed(ly + 4) << "\">" << escape(s.label)
        << "</text>\n";
    ly += 20;
  }
  out << "</g>\n</svg>\n";
}

}  // namespace qcd::cli
