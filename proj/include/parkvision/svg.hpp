#pragma once

#include <string>
#include <vector>

namespace parkvision::svg {

/// Linear value-to-pixel mapping, top/bottom are pixel rows of the plot
/// area (SVG y grows downward).
double linear_y(double v, double v_min, double v_max, double top, double bottom);

/// Log10 mapping for latency charts; v, v_min, v_max must be positive.
double log_y(double v, double v_min, double v_max, double top, double bottom);

struct BarGroup {
  std::string label;
  std::vector<double> values;  // parallel to the series name list
};

/// Grouped vertical bar chart with a linear y axis.
std::string grouped_bar_chart(const std::string& title, const std::string& y_label,
                              const std::vector<std::string>& series,
                              const std::vector<BarGroup>& groups, double y_min, double y_max);

struct LogChartEntry {
  std::string group;  // e.g. hardware tag
  std::string label;  // e.g. model id
  double value = 0.0;
};

struct ReferenceLine {
  std::string name;
  double value = 0.0;
};

/// Grouped bar chart with a logarithmic y axis (decade gridlines).
/// Reference lines are drawn dashed across the plot.
std::string log_bar_chart(const std::string& title, const std::string& y_label,
                          const std::vector<LogChartEntry>& entries,
                          const std::vector<ReferenceLine>& references = {});

struct Polyline {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y) in data space
};

/// Line chart with linear axes and an optional vertical marker.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Polyline>& lines,
                       double marker_x = 0.0, const std::string& marker_label = "");

}  // namespace parkvision::svg
