#include "lexis/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lexis {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_text_file(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series) {
  const double W = 720, H = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) {
      if (std::isfinite(v)) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
      }
    }
    for (double v : s.y) {
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
  }
  if (!(xmin < xmax)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (!(ymin < ymax)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double xpad = 0.02 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << title << "</text>\n";
  // frame
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
      << H - mt - mb << "\" fill=\"none\" stroke=\"#333\"/>\n";
  // ticks
  for (int i = 0; i <= 5; ++i) {
    double fx = xmin + (xmax - xmin) * i / 5.0;
    double fy = ymin + (ymax - ymin) * i / 5.0;
    out << "<text x=\"" << svg_num(px(fx)) << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << svg_num(fx)
        << "</text>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << svg_num(py(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << svg_num(fy)
        << "</text>\n";
    out << "<line x1=\"" << svg_num(px(fx)) << "\" y1=\"" << mt << "\" x2=\"" << svg_num(px(fx))
        << "\" y2=\"" << H - mb << "\" stroke=\"#eee\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << svg_num(py(fy)) << "\" x2=\"" << W - mr
        << "\" y2=\"" << svg_num(py(fy)) << "\" stroke=\"#eee\"/>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << H / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 "
         "18 "
      << H / 2 << ")\">" << y_label << "</text>\n";
  int ci = 0;
  for (const auto& s : series) {
    const char* color = kPalette[ci % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << svg_num(px(s.x[i])) << "," << svg_num(py(s.y[i])) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 18 + 16 * ci
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
        << "\">" << s.label << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
  write_text_file(path, out.str());
}

}  // namespace lexis
