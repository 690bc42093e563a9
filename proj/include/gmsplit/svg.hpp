#pragma once

#include <string>
#include <vector>

namespace gmsplit {

struct SvgSeries {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
};

// Minimal self-contained charts; no dependency, fixed 640x400 canvas.
std::string svg_line_chart(const std::string& title, const std::vector<SvgSeries>& series);
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace gmsplit
