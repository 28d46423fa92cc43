#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "specgeo/error.hpp"

namespace specgeo::experiments {

enum class SeriesStyle { line, points };

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  SeriesStyle style = SeriesStyle::line;
};

/// Minimal SVG 1.1 plot: axes with ticks, optional log scales, polylines or
/// dots, and a legend box.
struct SvgPlot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
  double width = 640;
  double height = 420;
  std::vector<Series> series;

  std::string render() const;
};

namespace svg_detail {

inline const std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                     "#9467bd", "#8c564b", "#e377c2", "#17becf"};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double transform(double v) const { return log ? std::log10(v) : v; }

  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (double e = std::floor(lo); e <= std::ceil(hi) + 1e-9; e += 1.0)
        if (e >= lo - 1e-9 && e <= hi + 1e-9) t.push_back(std::pow(10.0, e));
      if (t.size() < 2) t = {std::pow(10.0, lo), std::pow(10.0, hi)};
      return t;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (raw <= m * mag) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return t;
  }
};

inline Axis fit_axis(const std::vector<Series>& series, bool use_x, bool log) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series)
    for (double v : use_x ? s.x : s.y) {
      if (!std::isfinite(v) || (log && v <= 0.0)) continue;
      const double t = log ? std::log10(v) : v;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.04 * (hi - lo);
  return {lo - pad, hi + pad, log};
}

}  // namespace svg_detail

inline std::string SvgPlot::render() const {
  using namespace svg_detail;
  const double left = 72, right = 24, top = 40, bottom = 56;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  const Axis ax = fit_axis(series, true, log_x);
  const Axis ay = fit_axis(series, false, log_y);
  auto px = [&](double v) { return left + (ax.transform(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double v) { return top + ph - (ay.transform(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) + "\" height=\"" +
       num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) + "</text>\n";
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ax.ticks()) {
    const double x = px(t);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(x) + "\" y2=\"" + num(top + ph + 5) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(top + ph + 18) + "\" text-anchor=\"middle\">" + tick_label(t) + "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = py(t);
    s += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left) + "\" y2=\"" + num(y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + tick_label(t) + "</text>\n";
  }
  s += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 14) + "\" text-anchor=\"middle\">" + escape(xlabel) +
       "</text>\n";
  s += "<text x=\"16\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(top + ph / 2) + ")\">" + escape(ylabel) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& ser = series[k];
    if (ser.x.size() != ser.y.size()) fail(ErrorKind::LengthMismatch, "series x and y differ in length");
    const char* color = kPalette[k % kPalette.size()];
    auto usable = [&](std::size_t i) {
      return std::isfinite(ser.x[i]) && std::isfinite(ser.y[i]) && (!log_x || ser.x[i] > 0.0) &&
             (!log_y || ser.y[i] > 0.0);
    };
    if (ser.style == SeriesStyle::line) {
      std::string pts;
      for (std::size_t i = 0; i < ser.x.size(); ++i) {
        if (!usable(i)) continue;
        pts += num(px(ser.x[i])) + "," + num(py(ser.y[i])) + " ";
      }
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    } else {
      for (std::size_t i = 0; i < ser.x.size(); ++i) {
        if (!usable(i)) continue;
        s += "<circle cx=\"" + num(px(ser.x[i])) + "\" cy=\"" + num(py(ser.y[i])) + "\" r=\"1.6\" fill=\"" + color + "\"/>\n";
      }
    }
  }

  const double lx = left + pw - 150;
  double ly = top + 10;
  for (std::size_t k = 0; k < series.size(); ++k, ly += 16) {
    const char* color = kPalette[k % kPalette.size()];
    s += "<rect x=\"" + num(lx) + "\" y=\"" + num(ly) + "\" width=\"12\" height=\"8\" fill=\"" + color + "\"/>\n";
    s += "<text x=\"" + num(lx + 18) + "\" y=\"" + num(ly + 8) + "\">" + escape(series[k].name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace specgeo::experiments
