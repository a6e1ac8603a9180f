#include "sr3d/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sr3d {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 52.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void expand(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double clamp_span() const { return hi - lo > 1e-12 ? hi - lo : 1.0; }
};

struct Frame {
  Range x, y;

  double px(double v) const {
    return kMarginLeft +
           (v - x.lo) / x.clamp_span() * (kWidth - kMarginLeft - kMarginRight);
  }
  double py(double v) const {
    return kHeight - kMarginBottom -
           (v - y.lo) / y.clamp_span() *
               (kHeight - kMarginTop - kMarginBottom);
  }
};

std::string header() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s,
                 const std::string& attrs = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" " + attrs + ">" + s +
         "</text>\n";
}

std::string line(double x1, double y1, double x2, double y2,
                 const std::string& stroke, const std::string& extra = "") {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" +
         num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" " +
         extra + "/>\n";
}

std::string axes(const Frame& frame, const std::string& title,
                 const std::string& x_label, const std::string& y_label) {
  std::string out;
  const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  out += line(x0, y0, x1, y0, "black");
  out += line(x0, y0, x0, y1, "black");
  for (int t = 0; t <= 4; ++t) {
    const double fx = frame.x.lo + frame.x.clamp_span() * t / 4.0;
    const double fy = frame.y.lo + frame.y.clamp_span() * t / 4.0;
    const double px = frame.px(fx), py = frame.py(fy);
    out += line(px, y0, px, y0 + 4, "black");
    out += text(px, y0 + 18, tick_label(fx), "text-anchor=\"middle\"");
    out += line(x0 - 4, py, x0, py, "black");
    out += text(x0 - 8, py + 4, tick_label(fy), "text-anchor=\"end\"");
  }
  out += text((x0 + x1) / 2, kHeight - 12, x_label, "text-anchor=\"middle\"");
  out += text(16, (y0 + y1) / 2, y_label,
              "text-anchor=\"middle\" transform=\"rotate(-90 16 " +
                  num((y0 + y1) / 2) + ")\"");
  out += text((x0 + x1) / 2, 20, title,
              "text-anchor=\"middle\" font-size=\"14\"");
  return out;
}

}  // namespace

std::string svg_line_chart(const std::string& title,
                           const std::string& x_label,
                           const std::string& y_label,
                           std::span<const SvgSeries> series) {
  Frame frame;
  bool first = true;
  for (const SvgSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double lo = s.y[i] - (i < s.y_err.size() ? s.y_err[i] : 0.0);
      const double hi = s.y[i] + (i < s.y_err.size() ? s.y_err[i] : 0.0);
      if (first) {
        frame.x = {s.x[i], s.x[i]};
        frame.y = {lo, hi};
        first = false;
      }
      frame.x.expand(s.x[i]);
      frame.y.expand(lo);
      frame.y.expand(hi);
    }
  }

  std::string out = header();
  out += axes(frame, title, x_label, y_label);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const SvgSeries& s = series[si];
    const std::string color = kPalette[si % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) points += " ";
      points += num(frame.px(s.x[i])) + "," + num(frame.py(s.y[i]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    for (std::size_t i = 0; i < s.y_err.size() && i < s.x.size(); ++i) {
      if (s.y_err[i] <= 0.0) continue;
      const double px = frame.px(s.x[i]);
      out += line(px, frame.py(s.y[i] - s.y_err[i]), px,
                  frame.py(s.y[i] + s.y_err[i]), color);
    }
    out += line(kWidth - 180, kMarginTop + 16.0 * si + 4, kWidth - 160,
                kMarginTop + 16.0 * si + 4, color, "stroke-width=\"2\"");
    out += text(kWidth - 154, kMarginTop + 16.0 * si + 8, s.label);
  }
  out += "</svg>\n";
  return out;
}

std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        std::span<const double> x, std::span<const double> y) {
  Frame frame;  // unit square
  std::string out = header();
  out += axes(frame, title, x_label, y_label);
  out += line(frame.px(0.0), frame.py(0.0), frame.px(1.0), frame.py(1.0),
              "#999999", "stroke-dasharray=\"4 3\"");
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    out += "<circle cx=\"" + num(frame.px(x[i])) + "\" cy=\"" +
           num(frame.py(y[i])) +
           "\" r=\"2.5\" fill=\"#1f77b4\" fill-opacity=\"0.55\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string svg_bar_chart(const std::string& title,
                          std::span<const std::string> metric_labels,
                          std::span<const SvgBarGroup> groups) {
  Frame frame;
  frame.x = {0.0, 1.0};
  frame.y = {0.0, 1e-9};
  for (const SvgBarGroup& g : groups) {
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      frame.y.expand(g.values[i] +
                     (i < g.errors.size() ? g.errors[i] : 0.0));
    }
  }

  std::string out = header();
  out += axes(frame, title, "", "value");
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double group_w = plot_w / std::max<std::size_t>(groups.size(), 1);
  const std::size_t bars =
      std::max<std::size_t>(metric_labels.size(), 1);
  const double bar_w = group_w * 0.8 / bars;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const SvgBarGroup& g = groups[gi];
    const double gx = kMarginLeft + group_w * gi + group_w * 0.1;
    for (std::size_t b = 0; b < g.values.size(); ++b) {
      const std::string color = kPalette[b % std::size(kPalette)];
      const double x = gx + bar_w * b;
      const double top = frame.py(g.values[b]);
      const double base = frame.py(0.0);
      out += "<rect x=\"" + num(x) + "\" y=\"" + num(top) + "\" width=\"" +
             num(bar_w * 0.92) + "\" height=\"" + num(base - top) +
             "\" fill=\"" + color + "\"/>\n";
      if (b < g.errors.size() && g.errors[b] > 0.0) {
        const double cx = x + bar_w * 0.46;
        out += line(cx, frame.py(g.values[b] - g.errors[b]), cx,
                    frame.py(g.values[b] + g.errors[b]), "black");
      }
    }
    out += text(gx + group_w * 0.4, kHeight - kMarginBottom + 18, g.label,
                "text-anchor=\"middle\" font-size=\"10\"");
  }
  for (std::size_t b = 0; b < metric_labels.size(); ++b) {
    const std::string color = kPalette[b % std::size(kPalette)];
    out += "<rect x=\"" + num(kWidth - 180) + "\" y=\"" +
           num(kMarginTop + 16.0 * b) +
           "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
    out += text(kWidth - 162, kMarginTop + 16.0 * b + 10, metric_labels[b]);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace sr3d
