#include "groklab/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "groklab/common.hpp"

namespace groklab {
namespace svg {

namespace {

constexpr int kW = 720, kH = 420;
constexpr int kLeft = 64, kRight = 64, kTop = 36, kBottom = 48;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct AxisRange {
  double lo = 0, hi = 1;
  void expand(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) hi = lo + 1.0;
    const double m = 0.04 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  if (!(span > 0)) return {lo};
  double step = std::pow(10.0, std::floor(std::log10(span / target)));
  for (double mult : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
    if (span / (step * mult) <= target) {
      step *= mult;
      break;
    }
  }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step)
    t.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  return t;
}

}  // namespace

void LinePlot::write(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw RuntimeFault("cannot write " + path);

  AxisRange xr, yr[2];
  bool first = true;
  bool axis_used[2] = {false, false};
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double y = s.y[i];
      if (log_y && s.axis == 0) {
        if (!(y > 0)) continue;
        y = std::log10(y);
      }
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      if (first) {
        xr.lo = xr.hi = s.x[i];
        first = false;
      }
      xr.expand(s.x[i]);
      if (!axis_used[s.axis]) {
        yr[s.axis].lo = yr[s.axis].hi = y;
        axis_used[s.axis] = true;
      }
      yr[s.axis].expand(y);
    }
  }
  xr.pad();
  yr[0].pad();
  yr[1].pad();

  auto px = [&](double x) {
    return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kW - kLeft - kRight);
  };
  auto py = [&](double y, int axis) {
    return kH - kBottom - (y - yr[axis].lo) / (yr[axis].hi - yr[axis].lo) * (kH - kTop - kBottom);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
      << title << "</text>\n";

  // frame + ticks
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << (kW - kLeft - kRight)
      << "\" height=\"" << (kH - kTop - kBottom)
      << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (double t : nice_ticks(xr.lo, xr.hi)) {
    const double x = px(t);
    out << "<line x1=\"" << fmt_coord(x) << "\" y1=\"" << (kH - kBottom) << "\" x2=\""
        << fmt_coord(x) << "\" y2=\"" << (kH - kBottom + 4) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << fmt_coord(x) << "\" y=\"" << (kH - kBottom + 16)
        << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  for (double t : nice_ticks(yr[0].lo, yr[0].hi)) {
    const double y = py(t, 0);
    out << "<line x1=\"" << (kLeft - 4) << "\" y1=\"" << fmt_coord(y) << "\" x2=\"" << kLeft
        << "\" y2=\"" << fmt_coord(y) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << (kLeft - 7) << "\" y=\"" << fmt_coord(y + 3)
        << "\" text-anchor=\"end\">" << (log_y ? "1e" + fmt(t) : fmt(t)) << "</text>\n";
  }
  if (axis_used[1]) {
    for (double t : nice_ticks(yr[1].lo, yr[1].hi)) {
      const double y = py(t, 1);
      out << "<line x1=\"" << (kW - kRight) << "\" y1=\"" << fmt_coord(y) << "\" x2=\""
          << (kW - kRight + 4) << "\" y2=\"" << fmt_coord(y) << "\" stroke=\"#333\"/>\n";
      out << "<text x=\"" << (kW - kRight + 7) << "\" y=\"" << fmt_coord(y + 3)
          << "\" text-anchor=\"start\">" << fmt(t) << "</text>\n";
    }
  }
  out << "<text x=\"" << kW / 2 << "\" y=\"" << (kH - 10) << "\" text-anchor=\"middle\">"
      << xlabel << "</text>\n";
  out << "<text x=\"14\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << kH / 2 << ")\">" << ylabel << "</text>\n";
  if (!ylabel_right.empty())
    out << "<text x=\"" << (kW - 12) << "\" y=\"" << kH / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(90 " << (kW - 12) << " " << kH / 2
        << ")\">" << ylabel_right << "</text>\n";

  for (const auto& [xv, label] : vmarkers) {
    const double x = px(xv);
    out << "<line x1=\"" << fmt_coord(x) << "\" y1=\"" << kTop << "\" x2=\"" << fmt_coord(x)
        << "\" y2=\"" << (kH - kBottom)
        << "\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n";
    out << "<text x=\"" << fmt_coord(x + 3) << "\" y=\"" << (kTop + 12)
        << "\" fill=\"#555\">" << label << "</text>\n";
  }

  int color_idx = 0;
  double legend_y = kTop + 12;
  for (const auto& s : series) {
    const std::string color =
        s.color.empty() ? kPalette[color_idx++ % 8] : s.color;
    if (s.points_only) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        double y = s.y[i];
        if (log_y && s.axis == 0) {
          if (!(y > 0)) continue;
          y = std::log10(y);
        }
        out << "<circle cx=\"" << fmt_coord(px(s.x[i])) << "\" cy=\""
            << fmt_coord(py(y, s.axis)) << "\" r=\"2.2\" fill=\"" << color << "\"/>\n";
      }
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.4\"";
      if (s.dashed) out << " stroke-dasharray=\"5,3\"";
      out << " points=\"";
      bool pen_down = false;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        double y = s.y[i];
        if (log_y && s.axis == 0) {
          if (!(y > 0)) continue;
          y = std::log10(y);
        }
        if (!std::isfinite(y) || !std::isfinite(s.x[i])) continue;
        out << (pen_down ? " " : "") << fmt_coord(px(s.x[i])) << "," << fmt_coord(py(y, s.axis));
        pen_down = true;
      }
      out << "\"/>\n";
    }
    if (!s.label.empty()) {
      out << "<line x1=\"" << (kLeft + 8) << "\" y1=\"" << fmt_coord(legend_y - 3) << "\" x2=\""
          << (kLeft + 28) << "\" y2=\"" << fmt_coord(legend_y - 3) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
      out << "<text x=\"" << (kLeft + 32) << "\" y=\"" << fmt_coord(legend_y) << "\">" << s.label
          << "</text>\n";
      legend_y += 14;
    }
  }
  out << "</svg>\n";
  const std::string str = out.str();
  std::fwrite(str.data(), 1, str.size(), f);
  std::fclose(f);
}

void Heatmap::write(const std::string& path) const {
  if (rows * cols != static_cast<int>(values.size()))
    throw RuntimeFault("heatmap: shape mismatch");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw RuntimeFault("cannot write " + path);

  double lo = 0, hi = 1;
  bool first = true;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    if (first) {
      lo = hi = v;
      first = false;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1.0;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
      << title << "</text>\n";
  const double cw = static_cast<double>(kW - kLeft - kRight) / cols;
  const double ch = static_cast<double>(kH - kTop - kBottom) / rows;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double v = values[static_cast<std::size_t>(r * cols + c)];
      std::string fill = "#eeeeee";
      if (std::isfinite(v)) {
        const double t = (v - lo) / (hi - lo);
        // viridis-ish two-stop ramp
        const int rr = static_cast<int>(68 + t * (253 - 68));
        const int gg = static_cast<int>(1 + t * (231 - 1));
        const int bb = static_cast<int>(84 + t * (37 - 84));
        char buf[16];
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rr, gg, bb);
        fill = buf;
      }
      const double x = kLeft + c * cw;
      const double y = kTop + r * ch;
      out << "<rect x=\"" << fmt_coord(x) << "\" y=\"" << fmt_coord(y) << "\" width=\""
          << fmt_coord(cw) << "\" height=\"" << fmt_coord(ch) << "\" fill=\"" << fill
          << "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
      if (std::isfinite(v))
        out << "<text x=\"" << fmt_coord(x + cw / 2) << "\" y=\"" << fmt_coord(y + ch / 2 + 3)
            << "\" text-anchor=\"middle\" font-size=\"9\" fill=\"#ffffff\">" << fmt(v)
            << "</text>\n";
    }
  for (int c = 0; c < cols && c < static_cast<int>(xticks.size()); ++c)
    out << "<text x=\"" << fmt_coord(kLeft + (c + 0.5) * cw) << "\" y=\"" << (kH - kBottom + 16)
        << "\" text-anchor=\"middle\">" << xticks[static_cast<std::size_t>(c)] << "</text>\n";
  for (int r = 0; r < rows && r < static_cast<int>(yticks.size()); ++r)
    out << "<text x=\"" << (kLeft - 7) << "\" y=\"" << fmt_coord(kTop + (r + 0.5) * ch + 3)
        << "\" text-anchor=\"end\">" << yticks[static_cast<std::size_t>(r)] << "</text>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"" << (kH - 10) << "\" text-anchor=\"middle\">"
      << xlabel << "</text>\n";
  out << "<text x=\"14\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << kH / 2 << ")\">" << ylabel << "</text>\n";
  out << "</svg>\n";
  const std::string str = out.str();
  std::fwrite(str.data(), 1, str.size(), f);
  std::fclose(f);
}

}  // namespace svg
}  // namespace groklab
