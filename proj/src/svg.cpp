#include "gmsplit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gmsplit/errors.hpp"

namespace gmsplit {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 40;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

void chart_frame(std::ostringstream& os, const std::string& title, double x_min, double x_max,
                 double y_min, double y_max) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"16\">"
       << title << "</text>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight
       << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
       << kHeight - kBottom << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kHeight - kBottom << "\" text-anchor=\"end\" "
          "font-family=\"sans-serif\" font-size=\"11\">"
       << fmt(y_min) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\" "
          "font-family=\"sans-serif\" font-size=\"11\">"
       << fmt(y_max) << "</text>\n";
    os << "<text x=\"" << kLeft << "\" y=\"" << kHeight - kBottom + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(x_min)
       << "</text>\n";
    os << "<text x=\"" << kWidth - kRight << "\" y=\"" << kHeight - kBottom + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(x_max)
       << "</text>\n";
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::vector<SvgSeries>& series) {
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    bool first = true;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (first) {
                x_min = x_max = s.xs[i];
                y_min = y_max = s.ys[i];
                first = false;
            }
            x_min = std::min(x_min, s.xs[i]);
            x_max = std::max(x_max, s.xs[i]);
            y_min = std::min(y_min, s.ys[i]);
            y_max = std::max(y_max, s.ys[i]);
        }
    }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) y_max = y_min + 1;

    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * (kWidth - kLeft - kRight); };
    auto py = [&](double y) {
        return kHeight - kBottom - (y - y_min) / (y_max - y_min) * (kHeight - kTop - kBottom);
    };

    std::ostringstream os;
    chart_frame(os, title, x_min, x_max, y_min, y_max);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % (sizeof(kColors) / sizeof(kColors[0]))];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            os << px(s.xs[i]) << "," << py(s.ys[i]) << " ";
        }
        os << "\"/>\n";
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            os << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i])
               << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        os << "<text x=\"" << kWidth - kRight - 4 << "\" y=\"" << kTop + 16 * (k + 1)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
           << "\">" << s.name << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values) {
    double y_min = 0.0, y_max = 1.0;
    for (double v : values) {
        y_min = std::min(y_min, v);
        y_max = std::max(y_max, v);
    }
    if (y_max == y_min) y_max = y_min + 1;

    const std::size_t n = std::max<std::size_t>(1, values.size());
    const double slot = (kWidth - kLeft - kRight) / static_cast<double>(n);
    auto py = [&](double y) {
        return kHeight - kBottom - (y - y_min) / (y_max - y_min) * (kHeight - kTop - kBottom);
    };

    std::ostringstream os;
    chart_frame(os, title, 0, static_cast<double>(n), y_min, y_max);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
        const double top = py(std::max(values[i], 0.0));
        const double bottom = py(std::min(values[i], 0.0));
        os << "<rect x=\"" << x << "\" y=\"" << top << "\" width=\"" << slot * 0.7 << "\" height=\""
           << std::max(1.0, bottom - top) << "\" fill=\"#1f77b4\"/>\n";
        os << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << kHeight - kBottom + 16
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
           << (i < labels.size() ? labels[i] : "") << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

}  // namespace gmsplit
