#include "flowlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "flowlab/errors.hpp"

namespace flowlab {

namespace {

constexpr double width = 640.0, height = 480.0;
constexpr double margin_l = 70.0, margin_r = 20.0, margin_t = 40.0, margin_b = 55.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Axis {
  double lo{0.0}, hi{1.0};
  bool log_scale{false};

  double place(double v, double px_lo, double px_hi) const {
    double t = log_scale ? std::log10(v) : v;
    double a = log_scale ? std::log10(lo) : lo;
    double b = log_scale ? std::log10(hi) : hi;
    if (b <= a) b = a + 1.0;
    return px_lo + (t - a) / (b - a) * (px_hi - px_lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log_scale) {
      const int e_lo = static_cast<int>(std::floor(std::log10(lo)));
      const int e_hi = static_cast<int>(std::ceil(std::log10(hi)));
      for (int e = e_lo; e <= e_hi; ++e) {
        const double v = std::pow(10.0, e);
        if (v >= lo * 0.999 && v <= hi * 1.001) out.push_back(v);
      }
      if (out.size() < 2) out = {lo, hi};
      return out;
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
    const double first = std::ceil(lo / step) * step;
    for (double v = first; v <= hi + 0.5 * step; v += step) out.push_back(v);
    return out;
  }
};

void expand(double v, bool log_scale, double& lo, double& hi) {
  if (!std::isfinite(v)) return;
  if (log_scale && !(v > 0.0)) return;
  lo = std::min(lo, v);
  hi = std::max(hi, v);
}

void finish_range(double& lo, double& hi, bool log_scale) {
  if (lo > hi) {
    lo = log_scale ? 0.1 : 0.0;
    hi = 1.0;
  }
  if (lo == hi) {
    if (log_scale) {
      lo *= 0.5;
      hi *= 2.0;
    } else {
      lo -= 0.5;
      hi += 0.5;
    }
  } else if (!log_scale) {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  } else {
    lo /= 1.2;
    hi *= 1.2;
  }
}

void open_chart(std::ofstream& out, const std::string& title, const std::string& x_label,
                const std::string& y_label) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"16\">" << title << "</text>\n";
  out << "<text x=\"" << (margin_l + (width - margin_r)) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (margin_t + (height - margin_b)) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
      << (margin_t + (height - margin_b)) / 2 << ")\">" << y_label << "</text>\n";
}

void draw_axes(std::ofstream& out, const Axis& ax, const Axis& ay) {
  out << "<rect x=\"" << margin_l << "\" y=\"" << margin_t << "\" width=\""
      << width - margin_l - margin_r << "\" height=\"" << height - margin_t - margin_b
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (double v : ax.ticks()) {
    const double px = ax.place(v, margin_l, width - margin_r);
    out << "<line x1=\"" << px << "\" y1=\"" << height - margin_b << "\" x2=\"" << px << "\" y2=\""
        << height - margin_b + 5 << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << height - margin_b + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(v)
        << "</text>\n";
  }
  for (double v : ay.ticks()) {
    const double py = ay.place(v, height - margin_b, margin_t);
    out << "<line x1=\"" << margin_l - 5 << "\" y1=\"" << py << "\" x2=\"" << margin_l << "\" y2=\""
        << py << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << margin_l - 8 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(v)
        << "</text>\n";
  }
}

} // namespace

void write_svg_lines(const std::string& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<PlotSeries>& series, bool log_x,
                     bool log_y) {
  std::ofstream out(path);
  if (!out) throw ConfigError("svg: cannot open '" + path + "' for writing");
  Axis ax, ay;
  ax.log_scale = log_x;
  ay.log_scale = log_y;
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      expand(s.x[i], log_x, x_lo, x_hi);
      expand(s.y[i], log_y, y_lo, y_hi);
    }
  finish_range(x_lo, x_hi, log_x);
  finish_range(y_lo, y_hi, log_y);
  ax.lo = x_lo;
  ax.hi = x_hi;
  ay.lo = y_lo;
  ay.hi = y_hi;

  open_chart(out, title, x_label, y_label);
  draw_axes(out, ax, ay);
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (log_x && !(s.x[i] > 0.0)) continue;
      if (log_y && !(s.y[i] > 0.0)) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << num(ax.place(s.x[i], margin_l, width - margin_r)) << ','
          << num(ay.place(s.y[i], height - margin_b, margin_t)) << ' ';
    }
    out << "\"/>\n";
  }
  double ly = margin_t + 14.0;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    out << "<line x1=\"" << width - margin_r - 150 << "\" y1=\"" << ly << "\" x2=\""
        << width - margin_r - 126 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - margin_r - 120 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    ly += 16.0;
  }
  out << "</svg>\n";
  if (!out) throw ConfigError("svg: write to '" + path + "' failed");
}

void write_svg_regions(const std::string& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::vector<RegionCell>& cells,
                       const std::vector<PlotSeries>& boundaries,
                       const std::vector<std::pair<std::string, std::string>>& legend) {
  std::ofstream out(path);
  if (!out) throw ConfigError("svg: cannot open '" + path + "' for writing");
  Axis ax, ay;
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (const auto& c : cells) {
    expand(c.x, false, x_lo, x_hi);
    expand(c.x + c.w, false, x_lo, x_hi);
    expand(c.y, false, y_lo, y_hi);
    expand(c.y + c.h, false, y_lo, y_hi);
  }
  if (x_lo > x_hi) {
    x_lo = y_lo = 0.0;
    x_hi = y_hi = 1.0;
  }
  ax.lo = x_lo;
  ax.hi = x_hi;
  ay.lo = y_lo;
  ay.hi = y_hi;

  open_chart(out, title, x_label, y_label);
  for (const auto& c : cells) {
    const double px = ax.place(c.x, margin_l, width - margin_r);
    const double px2 = ax.place(c.x + c.w, margin_l, width - margin_r);
    const double py = ay.place(c.y + c.h, height - margin_b, margin_t);
    const double py2 = ay.place(c.y, height - margin_b, margin_t);
    out << "<rect x=\"" << num(px) << "\" y=\"" << num(py) << "\" width=\"" << num(px2 - px)
        << "\" height=\"" << num(py2 - py) << "\" fill=\"" << c.color << "\"/>\n";
  }
  for (const auto& s : boundaries) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] < x_lo || s.x[i] > x_hi || s.y[i] < y_lo || s.y[i] > y_hi) continue;
      out << num(ax.place(s.x[i], margin_l, width - margin_r)) << ','
          << num(ay.place(s.y[i], height - margin_b, margin_t)) << ' ';
    }
    out << "\"/>\n";
  }
  draw_axes(out, ax, ay);
  double ly = margin_t + 14.0;
  for (const auto& [color, label] : legend) {
    out << "<rect x=\"" << width - margin_r - 160 << "\" y=\"" << ly - 9
        << "\" width=\"12\" height=\"12\" fill=\"" << color << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << width - margin_r - 142 << "\" y=\"" << ly + 2
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
    ly += 18.0;
  }
  out << "</svg>\n";
  if (!out) throw ConfigError("svg: write to '" + path + "' failed");
}

} // namespace flowlab
