#include "ctnet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ctnet/errors.hpp"

namespace ctnet {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotBand>& bands, const std::vector<PlotLine>& lines,
                    const std::vector<std::pair<double, double>>& shade_x) {
  const double W = 720, H = 540;
  const double ml = 70, mr = 20, mt = 40, mb = 55;  // margins
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  auto grow = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  };
  for (const PlotLine& l : lines)
    for (size_t i = 0; i < l.x.size(); ++i) grow(l.x[i], l.y[i]);
  for (const PlotBand& b : bands)
    for (size_t i = 0; i < b.x.size(); ++i) {
      grow(b.x[i], b.lo[i]);
      grow(b.x[i], b.hi[i]);
    }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double px = 0.03 * (xmax - xmin), py = 0.05 * (ymax - ymin);
  xmin -= px;
  xmax += px;
  ymin -= py;
  ymax += py;
  auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto Y = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  for (const auto& [a, b] : shade_x) {
    const double xa = std::max(X(a), ml), xb = std::min(X(b), W - mr);
    if (xb <= xa) continue;
    s << "<rect x=\"" << fmt(xa) << "\" y=\"" << mt << "\" width=\"" << fmt(xb - xa)
      << "\" height=\"" << fmt(H - mt - mb) << "\" fill=\"#bbbbbb\" fill-opacity=\"0.35\"/>\n";
  }
  for (const PlotBand& b : bands) {
    if (b.x.size() < 2) continue;
    s << "<polygon fill=\"" << b.fill << "\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
    for (size_t i = 0; i < b.x.size(); ++i) s << fmt(X(b.x[i])) << "," << fmt(Y(b.hi[i])) << " ";
    for (size_t i = b.x.size(); i-- > 0;) s << fmt(X(b.x[i])) << "," << fmt(Y(b.lo[i])) << " ";
    s << "\"/>\n";
  }
  // axes and ticks
  s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << (W - ml - mr) << "\" height=\""
    << (H - mt - mb) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 5.0;
    const double yv = ymin + (ymax - ymin) * k / 5.0;
    s << "<line x1=\"" << fmt(X(xv)) << "\" y1=\"" << (H - mb) << "\" x2=\"" << fmt(X(xv))
      << "\" y2=\"" << (H - mb + 5) << "\" stroke=\"#333333\"/>\n";
    s << "<text x=\"" << fmt(X(xv)) << "\" y=\"" << (H - mb + 20)
      << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    s << "<line x1=\"" << (ml - 5) << "\" y1=\"" << fmt(Y(yv)) << "\" x2=\"" << ml << "\" y2=\""
      << fmt(Y(yv)) << "\" stroke=\"#333333\"/>\n";
    s << "<text x=\"" << (ml - 8) << "\" y=\"" << fmt(Y(yv) + 4)
      << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  for (const PlotLine& l : lines) {
    if (l.x.empty()) continue;
    s << "<polyline fill=\"none\" stroke=\"" << l.stroke << "\" stroke-width=\"1.8\" points=\"";
    for (size_t i = 0; i < l.x.size(); ++i)
      if (std::isfinite(l.x[i]) && std::isfinite(l.y[i]))
        s << fmt(X(l.x[i])) << "," << fmt(Y(l.y[i])) << " ";
    s << "\"/>\n";
  }
  double ly = mt + 16;
  for (const PlotLine& l : lines) {
    if (l.label.empty()) continue;
    s << "<line x1=\"" << (W - mr - 150) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
      << (W - mr - 120) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << l.stroke
      << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << (W - mr - 114) << "\" y=\"" << fmt(ly)
      << "\" font-size=\"12\">" << l.label << "</text>\n";
    ly += 16;
  }
  s << "<text x=\"" << (W / 2) << "\" y=\"" << (mt - 14)
    << "\" font-size=\"15\" text-anchor=\"middle\" font-weight=\"bold\">" << title << "</text>\n";
  s << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 12)
    << "\" font-size=\"13\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  s << "<text x=\"16\" y=\"" << (H / 2) << "\" font-size=\"13\" text-anchor=\"middle\" "
    << "transform=\"rotate(-90 16 " << (H / 2) << ")\">" << ylabel << "</text>\n";
  s << "</svg>\n";

  std::ofstream f(path);
  if (!f) throw InvalidInputError("svg: cannot open " + path + " for writing");
  f << s.str();
}

}  // namespace ctnet
