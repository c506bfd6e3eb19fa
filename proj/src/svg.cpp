#include "jumpbsde/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "jumpbsde/report.hpp"

namespace jumpbsde {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string render_line_plot_svg(
    const std::string& title, const std::vector<double>& xs,
    const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    if (xs.size() < 2) throw std::invalid_argument("svg plot: need at least two x values");
    for (const auto& [name, ys] : series)
        if (ys.size() != xs.size())
            throw std::invalid_argument("svg plot: series length mismatch: " + name);

    const double width = 640.0, height = 400.0, margin = 48.0;
    double x_lo = xs.front(), x_hi = xs.back();
    double y_lo = 0.0, y_hi = 1.0;
    bool first = true;
    for (const auto& [name, ys] : series) {
        for (double y : ys) {
            if (!std::isfinite(y)) continue;
            if (first) {
                y_lo = y_hi = y;
                first = false;
            } else {
                y_lo = std::min(y_lo, y);
                y_hi = std::max(y_hi, y);
            }
        }
    }
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;

    auto px = [&](double x) { return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin); };
    auto py = [&](double y) {
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(width)
        << "\" height=\"" << format_double(height) << "\" viewBox=\"0 0 " << format_double(width)
        << " " << format_double(height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << format_double(width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    // axes
    out << "<line x1=\"" << format_double(margin) << "\" y1=\"" << format_double(height - margin)
        << "\" x2=\"" << format_double(width - margin) << "\" y2=\""
        << format_double(height - margin) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << format_double(margin) << "\" y1=\"" << format_double(margin)
        << "\" x2=\"" << format_double(margin) << "\" y2=\"" << format_double(height - margin)
        << "\" stroke=\"black\"/>\n";
    // axis extent labels
    out << "<text x=\"" << format_double(margin) << "\" y=\"" << format_double(height - margin + 16)
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << format_double(x_lo) << "</text>\n";
    out << "<text x=\"" << format_double(width - margin) << "\" y=\""
        << format_double(height - margin + 16)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << format_double(x_hi) << "</text>\n";
    out << "<text x=\"" << format_double(margin - 4) << "\" y=\"" << format_double(height - margin)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << format_double(y_lo) << "</text>\n";
    out << "<text x=\"" << format_double(margin - 4) << "\" y=\"" << format_double(margin)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << format_double(y_hi) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& [name, ys] = series[s];
        const char* color = kPalette[s % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) out << " ";
            out << format_double(px(xs[i])) << "," << format_double(py(ys[i]));
        }
        out << "\"/>\n";
        out << "<text x=\"" << format_double(width - margin + 4) << "\" y=\""
            << format_double(margin + 14.0 * static_cast<double>(s))
            << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" << color << "\">" << name
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace jumpbsde
