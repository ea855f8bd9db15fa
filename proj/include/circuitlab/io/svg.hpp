#pragma once

// Self-contained SVG 1.1 plots: line/scatter panels and heatmaps.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "circuitlab/core.hpp"

namespace circuitlab::io {

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool scatter = false;
};

struct Axes {
  std::string title, xlabel, ylabel;
};

struct Panel {
  Axes axes;
  std::vector<Series> series;
};

namespace detail {

inline const char* palette(std::size_t k) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[k % 10];
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
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

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::vector<double> ticks(double lo, double hi, int target = 5) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = std::max(1e-3, 0.05 * std::abs(hi));
      lo -= pad;
      hi += pad;
    }
  }
};

inline void draw_frame(std::ostringstream& os, const Axes& a, double ox, double oy, double w, double h, Range xr,
                       Range yr) {
  os << "<rect x=\"" << num(ox) << "\" y=\"" << num(oy) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" fill=\"none\" stroke=\"#333\"/>\n";
  auto X = [&](double v) { return ox + (v - xr.lo) / (xr.hi - xr.lo) * w; };
  auto Y = [&](double v) { return oy + h - (v - yr.lo) / (yr.hi - yr.lo) * h; };
  for (double t : ticks(xr.lo, xr.hi)) {
    os << "<line x1=\"" << num(X(t)) << "\" y1=\"" << num(oy + h) << "\" x2=\"" << num(X(t)) << "\" y2=\""
       << num(oy + h + 4) << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << num(X(t)) << "\" y=\"" << num(oy + h + 16) << "\" font-size=\"10\" text-anchor=\"middle\">"
       << format_number(t) << "</text>\n";
  }
  for (double t : ticks(yr.lo, yr.hi)) {
    os << "<line x1=\"" << num(ox - 4) << "\" y1=\"" << num(Y(t)) << "\" x2=\"" << num(ox) << "\" y2=\"" << num(Y(t))
       << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << num(ox - 6) << "\" y=\"" << num(Y(t) + 3) << "\" font-size=\"10\" text-anchor=\"end\">"
       << format_number(t) << "</text>\n";
  }
  os << "<text x=\"" << num(ox + w / 2) << "\" y=\"" << num(oy - 8)
     << "\" font-size=\"13\" text-anchor=\"middle\">" << xml_escape(a.title) << "</text>\n";
  os << "<text x=\"" << num(ox + w / 2) << "\" y=\"" << num(oy + h + 32) << "\" font-size=\"11\" text-anchor=\"middle\">"
     << xml_escape(a.xlabel) << "</text>\n";
  os << "<text x=\"" << num(ox - 44) << "\" y=\"" << num(oy + h / 2) << "\" font-size=\"11\" text-anchor=\"middle\""
     << " transform=\"rotate(-90 " << num(ox - 44) << " " << num(oy + h / 2) << ")\">" << xml_escape(a.ylabel)
     << "</text>\n";
}

inline void draw_panel(std::ostringstream& os, const Panel& p, double x0, double y0, double pw, double ph) {
  const double ox = x0 + 60, oy = y0 + 30, w = pw - 80, h = ph - 75;
  Range xr, yr;
  for (const auto& s : p.series) {
    if (s.x.size() != s.y.size()) throw ParameterError("svg: series '" + s.name + "' has mismatched x and y");
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.settle();
  yr.settle();
  draw_frame(os, p.axes, ox, oy, w, h, xr, yr);
  auto X = [&](double v) { return ox + (v - xr.lo) / (xr.hi - xr.lo) * w; };
  auto Y = [&](double v) { return oy + h - (v - yr.lo) / (yr.hi - yr.lo) * h; };
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    const char* color = detail::palette(k);
    if (s.scatter) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          os << "<circle cx=\"" << num(X(s.x[i])) << "\" cy=\"" << num(Y(s.y[i])) << "\" r=\"1.5\" fill=\"" << color
             << "\"/>\n";
    } else {
      std::string pts;
      auto flush = [&] {
        if (!pts.empty())
          os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"" << pts << "\"/>\n";
        pts.clear();
      };
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
          flush();
          continue;
        }
        pts += num(X(s.x[i])) + "," + num(Y(s.y[i])) + " ";
      }
      flush();
    }
    if (!s.name.empty())
      os << "<text x=\"" << num(ox + w - 4) << "\" y=\"" << num(oy + 14 + 13 * k) << "\" font-size=\"10\" fill=\""
         << color << "\" text-anchor=\"end\">" << xml_escape(s.name) << "</text>\n";
  }
}

inline std::string open_svg(double w, double h) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return os.str();
}

}  // namespace detail

/// Grid of panels, `columns` per row.
inline std::string panels_svg(const std::vector<Panel>& panels, std::size_t columns = 1, double panel_width = 560,
                              double panel_height = 380) {
  if (panels.empty()) throw ParameterError("svg: nothing to plot");
  columns = std::max<std::size_t>(1, std::min(columns, panels.size()));
  const std::size_t rows = (panels.size() + columns - 1) / columns;
  std::ostringstream os;
  os << detail::open_svg(panel_width * columns, panel_height * rows);
  for (std::size_t k = 0; k < panels.size(); ++k)
    detail::draw_panel(os, panels[k], panel_width * (k % columns), panel_height * (k / columns), panel_width,
                       panel_height);
  os << "</svg>\n";
  return os.str();
}

inline std::string line_plot_svg(const Axes& axes, const std::vector<Series>& series) {
  return panels_svg({Panel{axes, series}});
}

/// values[i][j] at (xs[j], ys[i]), shaded white→blue over [min, max].
inline std::string heatmap_svg(const Axes& axes, const std::vector<double>& xs, const std::vector<double>& ys,
                               const std::vector<std::vector<double>>& values) {
  if (xs.empty() || ys.empty() || values.size() != ys.size()) throw ParameterError("svg: heatmap shape mismatch");
  detail::Range vr;
  for (const auto& row : values) {
    if (row.size() != xs.size()) throw ParameterError("svg: heatmap shape mismatch");
    for (double v : row) vr.add(v);
  }
  vr.settle();
  const double W = 600, H = 440, ox = 70, oy = 40, w = 440, h = 340;
  std::ostringstream os;
  os << detail::open_svg(W, H);
  const double cw = w / xs.size(), ch = h / ys.size();
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double v = values[i][j];
      const double u = std::isfinite(v) ? (v - vr.lo) / (vr.hi - vr.lo) : 0.0;
      const int r = static_cast<int>(std::lround(255 * (1 - u))), g = static_cast<int>(std::lround(255 * (1 - 0.6 * u)));
      os << "<rect x=\"" << detail::num(ox + j * cw) << "\" y=\"" << detail::num(oy + h - (i + 1) * ch)
         << "\" width=\"" << detail::num(cw + 0.5) << "\" height=\"" << detail::num(ch + 0.5) << "\" fill=\"rgb(" << r
         << "," << g << ",255)\"><title>" << format_number(v) << "</title></rect>\n";
    }
  detail::Range xr, yr;
  xr.add(xs.front() - 0.5 * (xs.size() > 1 ? xs[1] - xs[0] : 1));
  xr.add(xs.back() + 0.5 * (xs.size() > 1 ? xs[1] - xs[0] : 1));
  yr.add(ys.front() - 0.5 * (ys.size() > 1 ? ys[1] - ys[0] : 1));
  yr.add(ys.back() + 0.5 * (ys.size() > 1 ? ys[1] - ys[0] : 1));
  xr.settle();
  yr.settle();
  detail::draw_frame(os, axes, ox, oy, w, h, xr, yr);
  os << "<text x=\"" << detail::num(ox + w + 12) << "\" y=\"" << detail::num(oy + 10) << "\" font-size=\"10\">max "
     << format_number(vr.hi) << "</text>\n";
  os << "<text x=\"" << detail::num(ox + w + 12) << "\" y=\"" << detail::num(oy + h) << "\" font-size=\"10\">min "
     << format_number(vr.lo) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace circuitlab::io
