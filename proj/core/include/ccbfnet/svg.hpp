#pragma once

#include <string>
#include <vector>

namespace ccbfnet {

/// Minimal static SVG plotting: enough for trajectory time series, step
/// plots and filled contour maps. Plots are views of the CSV data and never
/// feed back into it.
class SvgPlot {
public:
    SvgPlot(double x_min, double x_max, double y_min, double y_max,
            std::string x_label, std::string y_label, std::string title);

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& color, bool dotted = false,
                  const std::string& label = "");
    /// Piecewise-constant line (value holds until the next sample).
    void step_line(const std::vector<double>& xs, const std::vector<double>& ys,
                   const std::string& color, bool dotted = false,
                   const std::string& label = "");
    void horizontal_line(double y, const std::string& color, bool dotted,
                         const std::string& label = "");

    std::string render() const;

private:
    double to_px_x(double x) const;
    double to_px_y(double y) const;

    double x_min_, x_max_, y_min_, y_max_;
    std::string x_label_, y_label_, title_;
    std::vector<std::string> body_;
    std::vector<std::pair<std::string, std::string>> legend_;  // label, color
};

/// Filled contour map of values on a regular grid (values[row][col], row =
/// y index). Uses a small banded color scale with labeled levels.
std::string contour_svg(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::vector<std::vector<double>>& values,
                        const std::string& x_label, const std::string& y_label,
                        const std::string& title);

}  // namespace ccbfnet
