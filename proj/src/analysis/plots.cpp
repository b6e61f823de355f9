#include <algorithm>
#include <cstdio>
#include <numeric>

#include "regstyle/analysis.hpp"
#include "regstyle/csv.hpp"

namespace regstyle::analysis {

namespace {

std::string num(double v, const char* fmt = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Range {
  double lo, hi;
};

Range range_of(const std::vector<SystemPoint>& pts, double SystemPoint::*field) {
  double lo = pts[0].*field, hi = lo;
  for (const auto& p : pts) {
    lo = std::min(lo, p.*field);
    hi = std::max(hi, p.*field);
  }
  const double pad = hi > lo ? 0.08 * (hi - lo) : 0.5;
  return {lo - pad, hi + pad};
}

}  // namespace

std::string plot_csv(const std::vector<SystemPoint>& points) {
  const auto flags = frontier_flags(points);
  std::string out = csv_row({"system", "x", "y", "n_cases", "on_frontier"});
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    out += csv_row({p.system, num(p.x), num(p.y), std::to_string(p.n_cases), flags[i] ? "true" : "false"});
  }
  return out;
}

std::string plot_svg(const std::vector<SystemPoint>& points, const std::string& title, const std::string& x_label,
                     const std::string& y_label) {
  constexpr double W = 480, H = 360, L = 60, R = 20, T = 40, B = 50;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"480\" height=\"360\" viewBox=\"0 0 480 360\">\n";
  out += "  <rect x=\"0\" y=\"0\" width=\"480\" height=\"360\" fill=\"white\"/>\n";
  out += "  <text x=\"240\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         xml_escape(title) + "</text>\n";
  out += "  <line x1=\"60\" y1=\"310\" x2=\"460\" y2=\"310\" stroke=\"black\"/>\n";
  out += "  <line x1=\"60\" y1=\"40\" x2=\"60\" y2=\"310\" stroke=\"black\"/>\n";
  out += "  <text x=\"260\" y=\"345\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         xml_escape(x_label) + "</text>\n";
  out += "  <text x=\"16\" y=\"175\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 175)\">" +
         xml_escape(y_label) + "</text>\n";
  if (points.empty()) return out + "</svg>\n";

  const Range xr = range_of(points, &SystemPoint::x);
  const Range yr = range_of(points, &SystemPoint::y);
  auto px = [&](double x) { return L + (x - xr.lo) / (xr.hi - xr.lo) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - yr.lo) / (yr.hi - yr.lo) * (H - T - B); };

  // Axis end labels.
  out += "  <text x=\"60\" y=\"325\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
         num(xr.lo, "%.3f") + "</text>\n";
  out += "  <text x=\"460\" y=\"325\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
         num(xr.hi, "%.3f") + "</text>\n";
  out += "  <text x=\"55\" y=\"313\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
         num(yr.lo, "%.3f") + "</text>\n";
  out += "  <text x=\"55\" y=\"43\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
         num(yr.hi, "%.3f") + "</text>\n";

  const auto frontier = pareto_frontier(points);
  out += "  <polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    if (i) out += ' ';
    out += num(px(frontier[i].x), "%.2f") + "," + num(py(frontier[i].y), "%.2f");
  }
  out += "\"/>\n";

  const auto flags = frontier_flags(points);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const std::string cx = num(px(p.x), "%.2f"), cy = num(py(p.y), "%.2f");
    out += "  <circle cx=\"" + cx + "\" cy=\"" + cy + "\" r=\"4\" fill=\"" + (flags[i] ? "#d62728" : "#1f77b4") +
           "\"><title>" + xml_escape(p.system) + "</title></circle>\n";
    out += "  <text x=\"" + num(px(p.x) + 6, "%.2f") + "\" y=\"" + num(py(p.y) - 6, "%.2f") +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + xml_escape(p.system) + "</text>\n";
  }
  return out + "</svg>\n";
}

}  // namespace regstyle::analysis
