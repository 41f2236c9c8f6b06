#pragma once

#include <string>
#include <vector>

namespace csirf::svg {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

/// Self-contained line chart (fixed 860x520 canvas, axes, legend).
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series);

struct Box {
    std::string label;
    double min, q1, median, q3, max;
};

/// Horizontal box-and-whisker plot, one row per box.
std::string box_plot(const std::string& title, const std::string& x_label,
                     const std::vector<Box>& boxes);

void write_file(const std::string& path, const std::string& content);

} // namespace csirf::svg
