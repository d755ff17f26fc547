#pragma once

// Minimal SVG line chart: one polyline per series, axes with ticks, legend.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace ctmcsens {

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  bool log_y = false;
  int width = 720;
  int height = 440;
};

namespace detail {

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

inline std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace detail

inline std::string line_chart_svg(const std::vector<ChartSeries>& series,
                                  const ChartOptions& opt = {}) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const double left = 80, right = 160, top = 40, bottom = 60;
  const double pw = opt.width - left - right;
  const double ph = opt.height - top - bottom;

  auto ty = [&](double v) { return opt.log_y ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (opt.log_y && !(s.y[i] > 0.0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (!opt.log_y) y0 = std::min(y0, 0.0);
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os.precision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
     << opt.height << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << detail::xml_escape(opt.title) << "</text>\n";

  os << "<g stroke=\"black\" stroke-width=\"1\">\n"
     << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
     << top + ph << "\"/>\n"
     << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
     << "\"/>\n"
     << "</g>\n";
  os << "<g font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i) {
    double xv = x0 + (x1 - x0) * i / 5.0;
    double X = px(xv);
    os << "<line x1=\"" << X << "\" y1=\"" << top + ph << "\" x2=\"" << X << "\" y2=\""
       << top + ph + 5 << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << X << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << detail::tick_label(xv) << "</text>\n";
    double yv = y0 + (y1 - y0) * i / 5.0;
    double Y = top + ph - (yv - y0) / (y1 - y0) * ph;
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << Y << "\" x2=\"" << left << "\" y2=\"" << Y
       << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << left - 8 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">"
       << detail::tick_label(opt.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << opt.height - 15
     << "\" text-anchor=\"middle\" font-size=\"13\">" << detail::xml_escape(opt.x_label)
     << "</text>\n"
     << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
     << "transform=\"rotate(-90 18 " << top + ph / 2 << ")\">" << detail::xml_escape(opt.y_label)
     << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % (sizeof kColors / sizeof *kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      if (opt.log_y && !(series[s].y[i] > 0.0)) continue;
      os << (first ? "" : " ") << px(series[s].x[i]) << ',' << py(series[s].y[i]);
      first = false;
    }
    os << "\"/>\n";
    double ly = top + 10 + 20.0 * static_cast<double>(s);
    os << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
       << detail::xml_escape(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ctmcsens
