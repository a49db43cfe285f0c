#include "tms/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "tms/csv.hpp"

namespace tms {
namespace {

constexpr double kWidth = 800.0, kHeight = 400.0;
constexpr double kLeft = 60.0, kRight = 16.0, kTop = 34.0, kBottom = 44.0;
constexpr size_t kMaxPointsPerSeries = 1600;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void grow(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  bool valid() const { return lo <= hi; }
  void pad() {
    if (!valid()) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

std::string fmt(double v) {
  // Trim float dust for tick labels.
  double r = std::round(v * 1e6) / 1e6;
  if (r == 0.0) r = 0.0;  // avoid -0
  return format_double(r);
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<PlotSeries>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xr.grow(x);
      yr.grow(y);
    }
  }
  xr.pad();
  yr.pad();

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 400\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"800\" height=\"400\" fill=\"white\"/>\n";
  out += "<text x=\"400\" y=\"18\" text-anchor=\"middle\" font-size=\"15\">" + title +
         "</text>\n";

  // Axes, grid, ticks.
  const double xstep = nice_step(xr.hi - xr.lo), ystep = nice_step(yr.hi - yr.lo);
  for (double x = std::ceil(xr.lo / xstep) * xstep; x <= xr.hi + 1e-9; x += xstep) {
    out += "<line x1=\"" + fmt(px(x)) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(px(x)) +
           "\" y2=\"" + fmt(kTop + ph) + "\" stroke=\"#eeeeee\"/>\n";
    out += "<text x=\"" + fmt(px(x)) + "\" y=\"" + fmt(kTop + ph + 16) +
           "\" text-anchor=\"middle\">" + fmt(x) + "</text>\n";
  }
  for (double y = std::ceil(yr.lo / ystep) * ystep; y <= yr.hi + 1e-9; y += ystep) {
    out += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(py(y)) + "\" x2=\"" + fmt(kLeft + pw) +
           "\" y2=\"" + fmt(py(y)) + "\" stroke=\"#eeeeee\"/>\n";
    out += "<text x=\"" + fmt(kLeft - 6) + "\" y=\"" + fmt(py(y) + 4) +
           "\" text-anchor=\"end\">" + fmt(y) + "</text>\n";
  }
  out += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) +
         "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#444444\"/>\n";
  out += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 8) +
         "\" text-anchor=\"middle\">" + x_label + "</text>\n";
  out += "<text x=\"14\" y=\"" + fmt(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         fmt(kTop + ph / 2) + ")\">" + y_label + "</text>\n";

  double legend_x = kLeft + 10;
  for (const auto& s : series) {
    if (s.points.empty()) continue;
    const size_t stride = std::max<size_t>(1, s.points.size() / kMaxPointsPerSeries);
    std::string pts;
    for (size_t i = 0; i < s.points.size(); i += stride) {
      pts += fmt(px(s.points[i].first)) + "," + fmt(py(s.points[i].second)) + " ";
    }
    if ((s.points.size() - 1) % stride != 0) {
      pts += fmt(px(s.points.back().first)) + "," + fmt(py(s.points.back().second));
    }
    out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.3\" points=\"" +
           pts + "\"/>\n";
    out += "<line x1=\"" + fmt(legend_x) + "\" y1=\"" + fmt(kTop + 10) + "\" x2=\"" +
           fmt(legend_x + 18) + "\" y2=\"" + fmt(kTop + 10) + "\" stroke=\"" + s.color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt(legend_x + 22) + "\" y=\"" + fmt(kTop + 14) + "\">" + s.label +
           "</text>\n";
    legend_x += 28.0 + 7.0 * s.label.size();
  }
  out += "</svg>\n";
  return out;
}

void write_line_chart(const std::filesystem::path& file, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << render_line_chart(title, x_label, y_label, series);
}

void write_run_plots(const std::filesystem::path& dir, const TimeSeriesLog& log) {
  PlotSeries e{"e", "#d62728", {}}, en{"e_n", "#1f77b4", {}}, ep{"e_p", "#2ca02c", {}};
  PlotSeries f{"F", "#1f77b4", {}}, fc{"F_c", "#d62728", {}};
  PlotSeries th{"theta", "#9467bd", {}};
  PlotSeries ra{"tau_c/F_c", "#8c564b", {}};
  for (const auto& r : log.rows) {
    e.points.emplace_back(r.t, r.e);
    en.points.emplace_back(r.t, r.e_n);
    ep.points.emplace_back(r.t, r.e_p);
    f.points.emplace_back(r.t, r.f_cmd);
    fc.points.emplace_back(r.t, r.f_c);
    th.points.emplace_back(r.t, r.theta * 180.0 / std::numbers::pi);
    if (r.ratio) ra.points.emplace_back(r.t, *r.ratio);
  }
  write_line_chart(dir / "plot_e.svg", log.scenario + ": positional error", "t [s]", "[mm]",
                   {e, en, ep});
  write_line_chart(dir / "plot_force.svg", log.scenario + ": commanded and measured force",
                   "t [s]", "[N]", {f, fc});
  write_line_chart(dir / "plot_theta.svg", log.scenario + ": theta", "t [s]", "[deg]", {th});
  write_line_chart(dir / "plot_ratio.svg", log.scenario + ": torque-to-force ratio", "t [s]",
                   "[mm]", {ra});
}

}  // namespace tms
