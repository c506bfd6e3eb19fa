#pragma once

#include <string>
#include <utility>
#include <vector>

namespace jumpbsde {

// Minimal deterministic line plot: fixed canvas, autoscaled axes, one
// polyline per named series. Output is plain SVG text with all numbers
// rendered through format_double, so identical inputs give identical bytes.
std::string render_line_plot_svg(
    const std::string& title, const std::vector<double>& xs,
    const std::vector<std::pair<std::string, std::vector<double>>>& series);

}  // namespace jumpbsde
