#include "ccbfnet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ccbfnet/errors.hpp"

namespace ccbfnet {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginL = 64.0;
constexpr double kMarginR = 16.0;
constexpr double kMarginT = 36.0;
constexpr double kMarginB = 48.0;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

std::string tick_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return std::string(buf);
}

}  // namespace

SvgPlot::SvgPlot(double x_min, double x_max, double y_min, double y_max,
                 std::string x_label, std::string y_label, std::string title)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max),
      x_label_(std::move(x_label)), y_label_(std::move(y_label)),
      title_(std::move(title)) {
    if (!(x_max_ > x_min_)) x_max_ = x_min_ + 1.0;
    if (!(y_max_ > y_min_)) y_max_ = y_min_ + 1.0;
}

double SvgPlot::to_px_x(double x) const {
    return kMarginL + (x - x_min_) / (x_max_ - x_min_) * (kWidth - kMarginL - kMarginR);
}

double SvgPlot::to_px_y(double y) const {
    return kHeight - kMarginB -
           (y - y_min_) / (y_max_ - y_min_) * (kHeight - kMarginT - kMarginB);
}

void SvgPlot::polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                       const std::string& color, bool dotted, const std::string& label) {
    if (xs.size() != ys.size() || xs.empty())
        throw ArgumentError("SvgPlot: polyline needs matching nonempty series");
    std::string pts;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        pts += num(to_px_x(xs[k])) + "," + num(to_px_y(ys[k]));
        if (k + 1 < xs.size()) pts += ' ';
    }
    body_.push_back("<polyline fill=\"none\" stroke=\"" + color +
                    "\" stroke-width=\"1.5\"" +
                    (dotted ? " stroke-dasharray=\"2,4\"" : "") + " points=\"" + pts +
                    "\"/>");
    if (!label.empty()) legend_.emplace_back(label, color);
}

void SvgPlot::step_line(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::string& color, bool dotted, const std::string& label) {
    if (xs.size() != ys.size() || xs.empty())
        throw ArgumentError("SvgPlot: step_line needs matching nonempty series");
    std::vector<double> sx, sy;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k > 0) {
            sx.push_back(xs[k]);
            sy.push_back(ys[k - 1]);
        }
        sx.push_back(xs[k]);
        sy.push_back(ys[k]);
    }
    polyline(sx, sy, color, dotted, label);
}

void SvgPlot::horizontal_line(double y, const std::string& color, bool dotted,
                              const std::string& label) {
    polyline({x_min_, x_max_}, {y, y}, color, dotted, label);
}

std::string SvgPlot::render() const {
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                      "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) +
                      " " + num(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // Frame
    svg += "<rect x=\"" + num(kMarginL) + "\" y=\"" + num(kMarginT) + "\" width=\"" +
           num(kWidth - kMarginL - kMarginR) + "\" height=\"" +
           num(kHeight - kMarginT - kMarginB) +
           "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    // Ticks
    const int ticks = 5;
    for (int k = 0; k <= ticks; ++k) {
        const double fx = x_min_ + (x_max_ - x_min_) * k / ticks;
        const double fy = y_min_ + (y_max_ - y_min_) * k / ticks;
        svg += "<text x=\"" + num(to_px_x(fx)) + "\" y=\"" + num(kHeight - kMarginB + 16) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + tick_label(fx) + "</text>\n";
        svg += "<text x=\"" + num(kMarginL - 6) + "\" y=\"" + num(to_px_y(fy) + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + tick_label(fy) + "</text>\n";
    }
    svg += "<text x=\"" + num((kMarginL + kWidth - kMarginR) / 2) + "\" y=\"" +
           num(kHeight - 12) + "\" font-size=\"13\" text-anchor=\"middle\">" + x_label_ +
           "</text>\n";
    svg += "<text x=\"16\" y=\"" + num((kMarginT + kHeight - kMarginB) / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           num((kMarginT + kHeight - kMarginB) / 2) + ")\">" + y_label_ + "</text>\n";
    svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" font-size=\"14\" "
           "text-anchor=\"middle\">" + title_ + "</text>\n";
    for (const auto& b : body_) svg += b + "\n";
    double ly = kMarginT + 14;
    for (const auto& [label, color] : legend_) {
        svg += "<line x1=\"" + num(kWidth - kMarginR - 130) + "\" y1=\"" + num(ly - 4) +
               "\" x2=\"" + num(kWidth - kMarginR - 106) + "\" y2=\"" + num(ly - 4) +
               "\" stroke=\"" + color + "\" stroke-width=\"2\"/>";
        svg += "<text x=\"" + num(kWidth - kMarginR - 100) + "\" y=\"" + num(ly) +
               "\" font-size=\"11\">" + label + "</text>\n";
        ly += 14;
    }
    svg += "</svg>\n";
    return svg;
}

std::string contour_svg(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::vector<std::vector<double>>& values,
                        const std::string& x_label, const std::string& y_label,
                        const std::string& title) {
    if (ys.size() != values.size() || xs.empty() || ys.empty())
        throw ArgumentError("contour_svg: grid shapes do not match");
    double vmin = values[0][0], vmax = values[0][0];
    for (const auto& row : values) {
        if (row.size() != xs.size())
            throw ArgumentError("contour_svg: grid shapes do not match");
        for (double v : row) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    }
    if (vmax <= vmin) vmax = vmin + 1.0;

    SvgPlot frame(xs.front(), xs.back(), ys.front(), ys.back(), x_label, y_label, title);
    std::string svg = frame.render();
    // Insert colored cells right after the background rect.
    const auto insert_at = svg.find("/>\n") + 3;  // after background
    std::string cells;
    const int bands = 9;
    auto color_for = [&](double v) {
        const int band =
            std::min(bands - 1, static_cast<int>((v - vmin) / (vmax - vmin) * bands));
        const int r = 255 - band * 24;
        const int g = 255 - band * 18;
        const int b = 255;
        char buf[40];
        std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)", r, g, b);
        return std::string(buf);
    };
    for (std::size_t row = 0; row + 1 < ys.size(); ++row) {
        for (std::size_t col = 0; col + 1 < xs.size(); ++col) {
            const double v = 0.25 * (values[row][col] + values[row][col + 1] +
                                     values[row + 1][col] + values[row + 1][col + 1]);
            // Pixel geometry duplicated from SvgPlot's fixed layout.
            const double px0 = 64.0 + (xs[col] - xs.front()) / (xs.back() - xs.front()) *
                                          (640.0 - 64.0 - 16.0);
            const double px1 = 64.0 + (xs[col + 1] - xs.front()) /
                                          (xs.back() - xs.front()) * (640.0 - 64.0 - 16.0);
            const double py0 = 420.0 - 48.0 - (ys[row] - ys.front()) /
                                                  (ys.back() - ys.front()) *
                                                  (420.0 - 36.0 - 48.0);
            const double py1 = 420.0 - 48.0 - (ys[row + 1] - ys.front()) /
                                                  (ys.back() - ys.front()) *
                                                  (420.0 - 36.0 - 48.0);
            cells += "<rect x=\"" + num(px0) + "\" y=\"" + num(py1) + "\" width=\"" +
                     num(px1 - px0 + 0.5) + "\" height=\"" + num(py0 - py1 + 0.5) +
                     "\" fill=\"" + color_for(v) + "\"/>\n";
        }
    }
    cells += "<text x=\"" + num(640.0 - 16.0 - 150) + "\" y=\"" + num(36.0 + 14) +
             "\" font-size=\"11\">min " + num(vmin) + ", max " + num(vmax) + "</text>\n";
    svg.insert(insert_at, cells);
    return svg;
}

}  // namespace ccbfnet
