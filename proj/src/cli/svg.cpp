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

#include "hbd/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace hbd::cli {

namespace {

std::string px(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string tick(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

} // namespace

SvgPlot::SvgPlot(int width, int height, Interval x_range, Interval y_range, int margin)
    : width_(width), height_(height), xr_(x_range), yr_(y_range), margin_(margin)
{
}

Point SvgPlot::to_pixel(Point p) const
{
    const double u = (p.first - xr_.lo) / xr_.width();
    const double v = (p.second - yr_.lo) / yr_.width();
    return {margin_ + u * (width_ - 2 * margin_), height_ - margin_ - v * (height_ - 2 * margin_)};
}

void SvgPlot::polyline(const std::vector<Point>& pts, const std::string& stroke, double width, double opacity)
{
    if (pts.size() < 2) return;
    std::string s = "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + px(width) + "\"";
    if (opacity < 1.0) s += " stroke-opacity=\"" + px(opacity) + "\"";
    s += " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point q = to_pixel(pts[i]);
        if (i) s += ' ';
        s += px(q.first) + "," + px(q.second);
    }
    body_.push_back(s + "\"/>");
}

void SvgPlot::pixel_line(Point a, Point b, const std::string& stroke, double width, double opacity)
{
    std::string s = "<line x1=\"" + px(a.first) + "\" y1=\"" + px(a.second) + "\" x2=\"" + px(b.first) +
                    "\" y2=\"" + px(b.second) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + px(width) + "\"";
    if (opacity < 1.0) s += " stroke-opacity=\"" + px(opacity) + "\"";
    body_.push_back(s + "/>");
}

void SvgPlot::marker(Point p, double radius, const std::string& fill)
{
    const Point q = to_pixel(p);
    body_.push_back("<circle cx=\"" + px(q.first) + "\" cy=\"" + px(q.second) + "\" r=\"" + px(radius) +
                    "\" fill=\"" + fill + "\"/>");
}

void SvgPlot::label(Point pixel, const std::string& text, int size, const std::string& anchor)
{
    body_.push_back("<text x=\"" + px(pixel.first) + "\" y=\"" + px(pixel.second) + "\" font-size=\"" +
                    std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(text) + "</text>");
}

void SvgPlot::title(const std::string& text)
{
    label({width_ / 2.0, margin_ / 2.0}, text, 15);
}

void SvgPlot::frame(const std::string& x_label, const std::string& y_label, int ticks)
{
    const double l = margin_, r = width_ - margin_, t = margin_, b = height_ - margin_;
    body_.push_back("<rect x=\"" + px(l) + "\" y=\"" + px(t) + "\" width=\"" + px(r - l) + "\" height=\"" +
                    px(b - t) + "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1.000\"/>");
    for (int i = 0; i <= ticks; ++i) {
        const double xv = xr_.lo + xr_.width() * i / ticks;
        const double yv = yr_.lo + yr_.width() * i / ticks;
        const double xp = to_pixel({xv, yr_.lo}).first;
        const double yp = to_pixel({xr_.lo, yv}).second;
        pixel_line({xp, b}, {xp, b + 5}, "#333", 1.0);
        pixel_line({l - 5, yp}, {l, yp}, "#333", 1.0);
        label({xp, b + 18}, tick(xv), 11);
        label({l - 8, yp + 4}, tick(yv), 11, "end");
    }
    label({(l + r) / 2, height_ - margin_ / 4.0}, x_label, 13);
    body_.push_back("<text x=\"" + px(margin_ / 3.0) + "\" y=\"" + px((t + b) / 2) +
                    "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 " + px(margin_ / 3.0) + " " +
                    px((t + b) / 2) + ")\">" + escape(y_label) + "</text>");
}

std::string SvgPlot::str(const std::string& run_hash) const
{
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<!-- hbd run " + run_hash + " -->\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_) + "\" height=\"" +
         std::to_string(height_) + "\" viewBox=\"0 0 " + std::to_string(width_) + " " + std::to_string(height_) +
         "\" font-family=\"sans-serif\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& line : body_) s += line + "\n";
    s += "</svg>\n";
    return s;
}

Projection3D::Projection3D(std::array<Interval, 3> ranges, double azimuth_deg, double elevation_deg, int width,
                           int height, int margin)
    : ranges_(ranges), width_(width), height_(height), margin_(margin)
{
    const double a = azimuth_deg * std::numbers::pi / 180.0;
    const double e = elevation_deg * std::numbers::pi / 180.0;
    ca_ = std::cos(a);
    sa_ = std::sin(a);
    ce_ = std::cos(e);
    se_ = std::sin(e);
}

Point Projection3D::operator()(double a, double b, double c) const
{
    // Unit-cube coordinates centred at the origin.
    const double u = (a - ranges_[0].lo) / ranges_[0].width() - 0.5;
    const double v = (b - ranges_[1].lo) / ranges_[1].width() - 0.5;
    const double w = (c - ranges_[2].lo) / ranges_[2].width() - 0.5;
    const double sx = ca_ * u - sa_ * v;
    const double depth = sa_ * u + ca_ * v;
    const double sy = ce_ * w - se_ * depth;
    const double scale = (std::min(width_, height_) - 2.0 * margin_) / 1.8;
    return {width_ / 2.0 + scale * sx, height_ / 2.0 - scale * sy};
}

void wireframe(SvgPlot& svg, const Projection3D& proj, const std::vector<std::array<double, 3>>& grid, int rows,
               int cols, const std::array<std::string, 3>& axis_labels, const std::array<Interval, 3>& ranges)
{
    const Point origin = proj(ranges[0].lo, ranges[1].lo, ranges[2].lo);
    const std::array<Point, 3> ends{proj(ranges[0].hi, ranges[1].lo, ranges[2].lo),
                                    proj(ranges[0].lo, ranges[1].hi, ranges[2].lo),
                                    proj(ranges[0].lo, ranges[1].lo, ranges[2].hi)};
    for (int i = 0; i < 3; ++i) {
        svg.pixel_line(origin, ends[i], "#333", 1.2);
        svg.label({ends[i].first + 4, ends[i].second - 4}, axis_labels[i], 13, "start");
    }
    auto at = [&](int r, int c) {
        const auto& g = grid[static_cast<std::size_t>(r * cols + c)];
        return proj(g[0], g[1], g[2]);
    };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c + 1 < cols; ++c) svg.pixel_line(at(r, c), at(r, c + 1), "#1f5fa8", 0.6, 0.8);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r + 1 < rows; ++r) svg.pixel_line(at(r, c), at(r + 1, c), "#a8321f", 0.6, 0.8);
}

} // namespace hbd::cli
