// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace fldiag::svg {

struct Series {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> points;
    // Optional band (same x order as points); drawn as thin lines.
    std::vector<double> band_lo, band_hi;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::string header_comment; // e.g. config hash
};

/// Standalone SVG 1.1 line plot; byte-deterministic for identical input.
void write_line_plot(const std::string& path, const PlotSpec& spec,
                     const std::vector<Series>& series);

struct HistSeries {
    std::string label;
    std::string color;
    std::vector<double> edges;
    std::vector<std::size_t> counts;
};

void write_histogram(const std::string& path, const PlotSpec& spec,
                     const std::vector<HistSeries>& series);

} // namespace fldiag::svg
