// SPDX-License-Identifier: Apache-2.0
//
// Minimal SVG line plot: linear x axis, logarithmic y axis, one polyline per
// series and a legend. Enough for rate-versus-step-size curves.

#ifndef LYACERT_SVG_HPP
#define LYACERT_SVG_HPP

#include <string>
#include <vector>

namespace lyacert::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;  // nonpositive values are skipped
};

struct PlotOptions {
    std::string title;
    std::string x_label = "x";
    std::string y_label = "y";
    int width = 640;
    int height = 420;
};

/// Complete SVG document. Output is a pure function of the inputs.
std::string log_plot(const std::vector<Series>& series, const PlotOptions& options);

}  // namespace lyacert::svg

#endif  // LYACERT_SVG_HPP
