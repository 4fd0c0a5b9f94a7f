#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "zominimax/error.hpp"
#include "zominimax/harness/experiment.hpp"

namespace zominimax::harness {

enum class XAxis { kIteration, kQueries };

struct PlotSpec {
  std::string metric;
  XAxis x_axis = XAxis::kIteration;
  bool log_y = false;
  std::string title;
  int width = 760;
  int height = 460;
};

namespace detail {

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

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

/// Roughly five round-number ticks covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(t);
  return ticks;
}

}  // namespace detail

/// Mean line per series with a +-1 std band, as a standalone SVG document.
inline std::string render_svg(const std::vector<Aggregate>& series, const PlotSpec& spec) {
  if (series.empty()) throw Error(ErrorKind::kInvalidArgument, "nothing to plot");
  struct Curve {
    std::string name;
    std::vector<double> x, mean, lo, hi;
    bool band = false;
  };
  std::vector<Curve> curves;
  for (const Aggregate& a : series) {
    const auto it = std::find(a.metric_names.begin(), a.metric_names.end(), spec.metric);
    if (it == a.metric_names.end()) {
      std::string avail;
      for (const auto& m : a.metric_names) avail += (avail.empty() ? "" : ", ") + m;
      throw Error(ErrorKind::kInvalidArgument, "metric '" + spec.metric + "' not in aggregate",
                  "available: " + avail);
    }
    const auto k = static_cast<std::size_t>(it - a.metric_names.begin());
    Curve c;
    c.name = a.series;
    for (const AggregateRow& r : a.rows) {
      const double x = spec.x_axis == XAxis::kIteration ? static_cast<double>(r.t) : r.queries_mean;
      if (!c.x.empty() && x < c.x.back()) {
        throw Error(ErrorKind::kInvalidArgument, "x axis is not monotone", a.series);
      }
      c.x.push_back(x);
      c.mean.push_back(r.mean[k]);
      c.lo.push_back(r.mean[k] - r.std[k]);
      c.hi.push_back(r.mean[k] + r.std[k]);
      if (r.std[k] > 0.0) c.band = true;
    }
    curves.push_back(std::move(c));
  }

  const auto ty = [&](double v) {
    return spec.log_y ? (v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN()) : v;
  };
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Curve& c : curves) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      xmin = std::min(xmin, c.x[i]);
      xmax = std::max(xmax, c.x[i]);
      for (double v : {c.mean[i], c.band ? c.lo[i] : c.mean[i], c.band ? c.hi[i] : c.mean[i]}) {
        const double w = ty(v);
        if (std::isfinite(w)) {
          ymin = std::min(ymin, w);
          ymax = std::max(ymax, w);
        }
      }
    }
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0;
  if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.04 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double left = 80, right = 170, top = 40, bottom = 60;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  const auto py = [&](double w) { return top + (1.0 - (std::clamp(w, ymin, ymax) - ymin) / (ymax - ymin)) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string title = spec.title.empty() ? spec.metric : spec.title;
  os << "<text x=\"" << detail::num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << detail::xml_escape(title) << "</text>\n";

  for (double t : detail::nice_ticks(xmin, xmax)) {
    os << "<line x1=\"" << detail::num(px(t)) << "\" y1=\"" << detail::num(top) << "\" x2=\"" << detail::num(px(t))
       << "\" y2=\"" << detail::num(top + ph) << "\" stroke=\"#e5e5e5\"/>\n";
    os << "<text x=\"" << detail::num(px(t)) << "\" y=\"" << detail::num(top + ph + 18)
       << "\" text-anchor=\"middle\">" << detail::tick_label(t) << "</text>\n";
  }
  for (double t : detail::nice_ticks(ymin, ymax)) {
    os << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(py(t)) << "\" x2=\"" << detail::num(left + pw)
       << "\" y2=\"" << detail::num(py(t)) << "\" stroke=\"#e5e5e5\"/>\n";
    const double label = spec.log_y ? std::pow(10.0, t) : t;
    os << "<text x=\"" << detail::num(left - 6) << "\" y=\"" << detail::num(py(t) + 4) << "\" text-anchor=\"end\">"
       << detail::tick_label(label) << "</text>\n";
  }
  os << "<rect x=\"" << detail::num(left) << "\" y=\"" << detail::num(top) << "\" width=\"" << detail::num(pw)
     << "\" height=\"" << detail::num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  const char* xlabel = spec.x_axis == XAxis::kIteration ? "iteration" : "function queries";
  os << "<text x=\"" << detail::num(left + pw / 2) << "\" y=\"" << detail::num(spec.height - 16)
     << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  os << "<text transform=\"translate(18," << detail::num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << detail::xml_escape(spec.metric) << (spec.log_y ? " (log scale)" : "") << "</text>\n";

  for (std::size_t s = 0; s < curves.size(); ++s) {
    const Curve& c = curves[s];
    const char* color = detail::kPalette[s % std::size(detail::kPalette)];
    if (c.band) {
      std::string pts;
      for (std::size_t i = 0; i < c.x.size(); ++i) {
        const double w = ty(c.hi[i]);
        if (std::isfinite(w)) pts += detail::num(px(c.x[i])) + "," + detail::num(py(w)) + " ";
      }
      for (std::size_t i = c.x.size(); i-- > 0;) {
        double w = ty(c.lo[i]);
        if (!std::isfinite(w)) w = ymin;
        pts += detail::num(px(c.x[i])) + "," + detail::num(py(w)) + " ";
      }
      os << "<polygon points=\"" << pts << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      const double w = ty(c.mean[i]);
      if (std::isfinite(w)) pts += detail::num(px(c.x[i])) + "," + detail::num(py(w)) + " ";
    }
    os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\"/>\n";
    const double ly = top + 14 + 20.0 * static_cast<double>(s);
    os << "<line x1=\"" << detail::num(left + pw + 14) << "\" y1=\"" << detail::num(ly) << "\" x2=\""
       << detail::num(left + pw + 38) << "\" y2=\"" << detail::num(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"3\"/>\n";
    os << "<text x=\"" << detail::num(left + pw + 44) << "\" y=\"" << detail::num(ly + 4) << "\">"
       << detail::xml_escape(c.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace zominimax::harness
