/*
   Copyright 2026 The hbdlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "hbd/foliation.hpp"

namespace hbd::cli {

using Point = std::pair<double, double>;

// Fixed-size SVG canvas with a linear data-to-pixel map. Coordinates are printed with
// three decimals so output is byte-stable.
class SvgPlot {
public:
    SvgPlot(int width, int height, Interval x_range, Interval y_range, int margin = 56);

    void polyline(const std::vector<Point>& pts, const std::string& stroke, double width,
                  double opacity = 1.0);
    void marker(Point p, double radius, const std::string& fill);
    void label(Point pixel, const std::string& text, int size = 13, const std::string& anchor = "middle");
    void frame(const std::string& x_label, const std::string& y_label, int ticks = 5);
    void title(const std::string& text);
    // Raw pixel-space line, for projected 3D drawings.
    void pixel_line(Point a, Point b, const std::string& stroke, double width, double opacity = 1.0);

    Point to_pixel(Point p) const;
    int width() const { return width_; }
    int height() const { return height_; }

    std::string str(const std::string& run_hash) const;

private:
    int width_;
    int height_;
    Interval xr_;
    Interval yr_;
    int margin_;
    std::vector<std::string> body_;
};

// Orthographic projection of 3D points onto the canvas; axes are normalised to the
// given ranges so the drawing fills a unit cube.
class Projection3D {
public:
    Projection3D(std::array<Interval, 3> ranges, double azimuth_deg, double elevation_deg, int width,
                 int height, int margin = 48);
    Point operator()(double a, double b, double c) const;

private:
    std::array<Interval, 3> ranges_;
    double ca_, sa_, ce_, se_;
    int width_;
    int height_;
    int margin_;
};

// Draws the wireframe of a grid of 3D points, rows and columns, plus the three box axes.
void wireframe(SvgPlot& svg, const Projection3D& proj, const std::vector<std::array<double, 3>>& grid, int rows,
               int cols, const std::array<std::string, 3>& axis_labels, const std::array<Interval, 3>& ranges);

} // namespace hbd::cli
