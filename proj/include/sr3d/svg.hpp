#ifndef SR3D_SVG_HPP_
#define SR3D_SVG_HPP_

#include <span>
#include <string>
#include <vector>

namespace sr3d {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_err;  // optional whiskers, empty or same length as y
};

/// Multi-series line chart with axes, ticks and a legend. Deterministic
/// output (fixed-precision coordinates, no timestamps).
std::string svg_line_chart(const std::string& title,
                           const std::string& x_label,
                           const std::string& y_label,
                           std::span<const SvgSeries> series);

/// Scatter of (x, y) points in the unit square with the x = y diagonal
/// drawn for reference.
std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        std::span<const double> x, std::span<const double> y);

struct SvgBarGroup {
  std::string label;            // one group per config
  std::vector<double> values;   // one bar per metric
  std::vector<double> errors;   // whiskers, empty or same length
};

/// Grouped bar chart; `metric_labels` names the bars within each group.
std::string svg_bar_chart(const std::string& title,
                          std::span<const std::string> metric_labels,
                          std::span<const SvgBarGroup> groups);

}  // namespace sr3d

#endif  // SR3D_SVG_HPP_
