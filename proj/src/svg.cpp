#include "spba/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spba {

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series, int width,
                     int height) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }

  const double ml = 60, mr = 20, mt = 40, mb = 40;  // margins
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
     << height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"15\">"
     << escape_xml(title) << "</text>\n"
     << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // tick labels at the corners of the data range
  os << "<text x=\"" << ml << "\" y=\"" << height - 16
     << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(xmin)
     << "</text>\n"
     << "<text x=\"" << width - mr << "\" y=\"" << height - 16
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << fmt(xmax) << "</text>\n"
     << "<text x=\"" << ml - 6 << "\" y=\"" << mt + ph
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << fmt(ymin) << "</text>\n"
     << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << fmt(ymax) << "</text>\n";

  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      os << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    }
    os << "\"/>\n";
  }

  double ly = mt + 14;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    os << "<line x1=\"" << ml + 8 << "\" y1=\"" << ly - 4 << "\" x2=\""
       << ml + 28 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << ml + 34 << "\" y=\"" << ly
       << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << escape_xml(s.label) << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
}

}  // namespace spba
