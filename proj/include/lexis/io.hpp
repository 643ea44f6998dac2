#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lexis {

// Shortest decimal form that round-trips a double exactly (17 significant
// digits); used for every floating-point value written to disk.
std::string format_double(double v);

std::uint64_t fnv1a64(const std::string& s);

void write_text_file(const std::filesystem::path& path, const std::string& body);
std::string read_text_file(const std::filesystem::path& path);

// One polyline of a quick-look chart.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal self-contained vector-graphic (SVG) line chart. Axes are linear;
// pass log-transformed data for log plots. Output is deterministic.
void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

}  // namespace lexis
