#include "parkvision/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace parkvision::svg {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 540.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 70.0;

const char* kPalette[] = {"#3b6fb5", "#d9762b", "#4c9e55", "#b04a4a",
                          "#7b5ca8", "#5a8f8f", "#c2a239", "#76656a"};

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
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

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string header() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"13\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string title_text(const std::string& title) {
  return "<text x=\"" + num(kWidth / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"17\">" +
         escape(title) + "</text>\n";
}

std::string axis_frame() {
  const double bottom = kHeight - kMarginBottom;
  return "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop) + "\" x2=\"" +
         num(kMarginLeft) + "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n" + "<line x1=\"" +
         num(kMarginLeft) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(kWidth - kMarginRight) +
         "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n";
}

std::string y_axis_label(const std::string& label) {
  const double cy = (kMarginTop + kHeight - kMarginBottom) / 2;
  return "<text x=\"18\" y=\"" + num(cy) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num(cy) + ")\">" + escape(label) + "</text>\n";
}

}  // namespace

double linear_y(double v, double v_min, double v_max, double top, double bottom) {
  if (v_max <= v_min) throw std::invalid_argument("degenerate value range");
  const double t = (v - v_min) / (v_max - v_min);
  return bottom - t * (bottom - top);
}

double log_y(double v, double v_min, double v_max, double top, double bottom) {
  if (v <= 0.0 || v_min <= 0.0 || v_max <= 0.0) {
    throw std::invalid_argument("log scale requires positive values");
  }
  if (v_max <= v_min) throw std::invalid_argument("degenerate value range");
  const double t = (std::log10(v) - std::log10(v_min)) / (std::log10(v_max) - std::log10(v_min));
  return bottom - t * (bottom - top);
}

std::string grouped_bar_chart(const std::string& title, const std::string& y_label,
                              const std::vector<std::string>& series,
                              const std::vector<BarGroup>& groups, double y_min, double y_max) {
  if (groups.empty() || series.empty()) throw std::invalid_argument("chart needs data");
  const double bottom = kHeight - kMarginBottom;
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double group_w = plot_w / groups.size();
  const double bar_w = std::min(48.0, group_w * 0.8 / series.size());

  std::string out = header() + title_text(title) + y_axis_label(y_label);

  // horizontal gridlines at 5 even steps
  for (int i = 0; i <= 5; ++i) {
    const double v = y_min + (y_max - y_min) * i / 5.0;
    const double y = linear_y(v, y_min, y_max, kMarginTop, bottom);
    out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(kWidth - kMarginRight) + "\" y2=\"" + num(y) +
           "\" stroke=\"#dddddd\"/>\n<text x=\"" + num(kMarginLeft - 8) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const BarGroup& group = groups[g];
    if (group.values.size() != series.size()) {
      throw std::invalid_argument("group '" + group.label + "' has wrong series count");
    }
    const double gx = kMarginLeft + g * group_w;
    const double total_bars = bar_w * series.size();
    const double start = gx + (group_w - total_bars) / 2;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = std::clamp(group.values[s], y_min, y_max);
      const double y = linear_y(v, y_min, y_max, kMarginTop, bottom);
      out += "<rect x=\"" + num(start + s * bar_w) + "\" y=\"" + num(y) + "\" width=\"" +
             num(bar_w - 2) + "\" height=\"" + num(bottom - y) + "\" fill=\"" +
             kPalette[s % 8] + "\"/>\n";
    }
    out += "<text x=\"" + num(gx + group_w / 2) + "\" y=\"" + num(bottom + 18) +
           "\" text-anchor=\"middle\">" + escape(group.label) + "</text>\n";
  }

  // legend
  double lx = kMarginLeft;
  for (std::size_t s = 0; s < series.size(); ++s) {
    out += "<rect x=\"" + num(lx) + "\" y=\"" + num(kHeight - 24) +
           "\" width=\"12\" height=\"12\" fill=\"" + kPalette[s % 8] + "\"/>\n<text x=\"" +
           num(lx + 16) + "\" y=\"" + num(kHeight - 14) + "\">" + escape(series[s]) + "</text>\n";
    lx += 26 + 8.0 * series[s].size();
  }

  out += axis_frame();
  out += "</svg>\n";
  return out;
}

std::string log_bar_chart(const std::string& title, const std::string& y_label,
                          const std::vector<LogChartEntry>& entries,
                          const std::vector<ReferenceLine>& references) {
  if (entries.empty()) throw std::invalid_argument("chart needs data");
  double v_min = entries.front().value;
  double v_max = v_min;
  for (const auto& e : entries) {
    if (e.value <= 0.0) throw std::invalid_argument("log chart values must be positive");
    v_min = std::min(v_min, e.value);
    v_max = std::max(v_max, e.value);
  }
  for (const auto& r : references) {
    if (r.value > 0.0) {
      v_min = std::min(v_min, r.value);
      v_max = std::max(v_max, r.value);
    }
  }
  // expand to whole decades so every bar fits with margin
  v_min = std::pow(10.0, std::floor(std::log10(v_min)));
  v_max = std::pow(10.0, std::ceil(std::log10(v_max) + 1e-12));
  if (v_max <= v_min) v_max = v_min * 10.0;

  const double bottom = kHeight - kMarginBottom;
  std::string out = header() + title_text(title) + y_axis_label(y_label);

  for (double v = v_min; v <= v_max * 1.0001; v *= 10.0) {
    const double y = log_y(v, v_min, v_max, kMarginTop, bottom);
    out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(kWidth - kMarginRight) + "\" y2=\"" + num(y) +
           "\" stroke=\"#dddddd\"/>\n<text x=\"" + num(kMarginLeft - 8) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }

  // stable group order, first appearance
  std::vector<std::string> group_names;
  for (const auto& e : entries) {
    if (std::find(group_names.begin(), group_names.end(), e.group) == group_names.end()) {
      group_names.push_back(e.group);
    }
  }
  std::map<std::string, int> label_color;
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double group_w = plot_w / group_names.size();

  for (std::size_t g = 0; g < group_names.size(); ++g) {
    std::vector<const LogChartEntry*> members;
    for (const auto& e : entries) {
      if (e.group == group_names[g]) members.push_back(&e);
    }
    const double bar_w = std::min(40.0, group_w * 0.8 / members.size());
    const double gx = kMarginLeft + g * group_w;
    const double start = gx + (group_w - bar_w * members.size()) / 2;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (!label_color.contains(members[i]->label)) {
        const int next = static_cast<int>(label_color.size());
        label_color[members[i]->label] = next;
      }
      const double y = log_y(members[i]->value, v_min, v_max, kMarginTop, bottom);
      out += "<rect x=\"" + num(start + i * bar_w) + "\" y=\"" + num(y) + "\" width=\"" +
             num(bar_w - 2) + "\" height=\"" + num(bottom - y) + "\" fill=\"" +
             kPalette[label_color[members[i]->label] % 8] + "\"/>\n";
    }
    out += "<text x=\"" + num(gx + group_w / 2) + "\" y=\"" + num(bottom + 18) +
           "\" text-anchor=\"middle\">" + escape(group_names[g]) + "</text>\n";
  }

  for (const auto& r : references) {
    if (r.value <= 0.0) continue;
    const double y = log_y(r.value, v_min, v_max, kMarginTop, bottom);
    out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(kWidth - kMarginRight) + "\" y2=\"" + num(y) +
           "\" stroke=\"#888888\" stroke-dasharray=\"6 4\"/>\n<text x=\"" +
           num(kWidth - kMarginRight - 4) + "\" y=\"" + num(y - 4) +
           "\" text-anchor=\"end\" fill=\"#666666\">" + escape(r.name) + "</text>\n";
  }

  double lx = kMarginLeft;
  for (const auto& [label, color] : label_color) {
    out += "<rect x=\"" + num(lx) + "\" y=\"" + num(kHeight - 24) +
           "\" width=\"12\" height=\"12\" fill=\"" + kPalette[color % 8] + "\"/>\n<text x=\"" +
           num(lx + 16) + "\" y=\"" + num(kHeight - 14) + "\">" + escape(label) + "</text>\n";
    lx += 26 + 8.0 * label.size();
  }

  out += axis_frame();
  out += "</svg>\n";
  return out;
}

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Polyline>& lines,
                       double marker_x, const std::string& marker_label) {
  if (lines.empty()) throw std::invalid_argument("chart needs data");
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool first = true;
  for (const auto& line : lines) {
    for (const auto& [x, y] : line.points) {
      if (first) {
        x_min = x_max = x;
        y_min = y_max = y;
        first = false;
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (first) throw std::invalid_argument("chart needs points");
  if (x_max <= x_min) x_max = x_min + 1.0;
  y_min = std::min(0.0, y_min);
  if (y_max <= y_min) y_max = y_min + 1.0;
  y_max *= 1.05;

  const double bottom = kHeight - kMarginBottom;
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  auto px = [&](double x) { return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w; };

  std::string out = header() + title_text(title) + y_axis_label(y_label);
  for (int i = 0; i <= 5; ++i) {
    const double v = y_min + (y_max - y_min) * i / 5.0;
    const double y = linear_y(v, y_min, y_max, kMarginTop, bottom);
    out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(kWidth - kMarginRight) + "\" y2=\"" + num(y) +
           "\" stroke=\"#dddddd\"/>\n<text x=\"" + num(kMarginLeft - 8) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }
  for (int i = 0; i <= 8; ++i) {
    const double v = x_min + (x_max - x_min) * i / 8.0;
    out += "<text x=\"" + num(px(v)) + "\" y=\"" + num(bottom + 18) +
           "\" text-anchor=\"middle\">" + num(v) + "</text>\n";
  }
  out += "<text x=\"" + num(kMarginLeft + plot_w / 2) + "\" y=\"" + num(kHeight - 30) +
         "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";

  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string points;
    for (const auto& [x, y] : lines[i].points) {
      points += num(px(x)) + "," + num(linear_y(y, y_min, y_max, kMarginTop, bottom)) + " ";
    }
    out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + kPalette[i % 8] +
           "\" stroke-width=\"2\"/>\n";
    out += "<rect x=\"" + num(kMarginLeft + 150.0 * i) + "\" y=\"" + num(kHeight - 24) +
           "\" width=\"12\" height=\"12\" fill=\"" + kPalette[i % 8] + "\"/>\n<text x=\"" +
           num(kMarginLeft + 150.0 * i + 16) + "\" y=\"" + num(kHeight - 14) + "\">" +
           escape(lines[i].name) + "</text>\n";
  }

  if (!marker_label.empty()) {
    const double x = px(marker_x);
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(kMarginTop) + "\" x2=\"" + num(x) +
           "\" y2=\"" + num(bottom) +
           "\" stroke=\"#aa3333\" stroke-dasharray=\"4 4\"/>\n<text x=\"" + num(x + 6) +
           "\" y=\"" + num(kMarginTop + 16) + "\" fill=\"#aa3333\">" + escape(marker_label) +
           "</text>\n";
  }

  out += axis_frame();
  out += "</svg>\n";
  return out;
}

}  // namespace parkvision::svg
