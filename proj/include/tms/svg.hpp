#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tms/world.hpp"

namespace tms {

struct PlotSeries {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

/// Minimal polyline chart in a fixed 800x400 viewBox with axes, ticks
/// and a legend. Long series are decimated to keep files small.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<PlotSeries>& series);

void write_line_chart(const std::filesystem::path& file, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series);

/// The standard per-run charts: errors, forces, theta and tau/F ratio.
void write_run_plots(const std::filesystem::path& dir, const TimeSeriesLog& log);

}  // namespace tms
