#include "gkdv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gkdv {

namespace {

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, bool log) {
  char buf[32];
  if (log)
    std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(v)));
  else
    std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double map(double v) const { return log ? std::log10(v) : v; }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (double d = std::ceil(lo); d <= hi + 1e-12; d += 1.0) t.push_back(d);
      if (t.size() < 2) t = {lo, hi};
      return t;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) t.push_back(v);
    return t;
  }
};

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  const double W = spec.width, H = spec.height;
  const double ml = 70, mr = 150, mt = 36, mb = 50;
  const double pw = W - ml - mr, ph = H - mt - mb;

  Axis ax{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), spec.log_x};
  Axis ay{ax.lo, ax.hi, spec.log_y};
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0.0) && (!spec.log_y || y > 0.0);
  };
  for (const auto& l : spec.lines)
    for (const auto& [x, y] : l.points)
      if (usable(x, y)) {
        ax.lo = std::min(ax.lo, ax.map(x));
        ax.hi = std::max(ax.hi, ax.map(x));
        ay.lo = std::min(ay.lo, ay.map(y));
        ay.hi = std::max(ay.hi, ay.map(y));
      }
  if (!(ax.lo <= ax.hi)) ax.lo = 0.0, ax.hi = 1.0;
  if (!(ay.lo <= ay.hi)) ay.lo = 0.0, ay.hi = 1.0;
  for (Axis* a : {&ax, &ay})
    if (a->hi - a->lo < 1e-12) {
      const double pad = a->log ? 0.5 : std::max(1e-12, 0.05 * std::fabs(a->lo));
      a->lo -= pad;
      a->hi += pad;
    }
  const double ypad = 0.04 * (ay.hi - ay.lo);
  ay.lo -= ypad;
  ay.hi += ypad;

  auto px = [&](double x) { return ml + (ax.map(x) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double y) { return mt + ph - (ay.map(y) - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(ml + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ax.ticks()) {
    const double x = ml + (t - ax.lo) / (ax.hi - ax.lo) * pw;
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(x) << "\" y2=\"" << num(mt)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << num(mt + ph + 16) << "\" text-anchor=\"middle\">"
       << tick_label(t, ax.log) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = mt + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph;
    os << "<line x1=\"" << num(ml) << "\" y1=\"" << num(y) << "\" x2=\"" << num(ml + pw) << "\" y2=\"" << num(y)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
       << tick_label(t, ay.log) << "</text>\n";
  }
  os << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(H - 12) << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << num(mt + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(spec.y_label) << "</text>\n";

  for (std::size_t i = 0; i < spec.lines.size(); ++i) {
    const auto& l = spec.lines[i];
    const char* color = kColors[i % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (l.dashed) os << " stroke-dasharray=\"6,4\"";
    os << " points=\"";
    for (const auto& [x, y] : l.points)
      if (usable(x, y)) os << num(px(x)) << ',' << num(py(y)) << ' ';
    os << "\"/>\n";
    const double ly = mt + 14 + 18.0 * static_cast<double>(i);
    os << "<line x1=\"" << num(ml + pw + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(ml + pw + 34)
       << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\""
       << (l.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    os << "<text x=\"" << num(ml + pw + 40) << "\" y=\"" << num(ly) << "\">" << escape(l.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace gkdv
