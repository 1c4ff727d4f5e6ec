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

#include "hbd/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "hbd/error.hpp"

namespace hbd {

namespace {

constexpr double kA = kHalfPi;

double clip_finite(double v, double fallback)
{
    return std::isfinite(v) ? v : fallback;
}

ScalarField central_t(ScalarField f)
{
    return [f = std::move(f)](double t, double x) {
        const double h = kFiniteDifferenceStep;
        return (f(t + h, x) - f(t - h, x)) / (2.0 * h);
    };
}

ScalarField central_x(ScalarField f)
{
    return [f = std::move(f)](double t, double x) {
        const double h = kFiniteDifferenceStep;
        return (f(t, x + h) - f(t, x - h)) / (2.0 * h);
    };
}

} // namespace

bool DegeneracyRegion::contains(double t, double x) const
{
    if (!t_interval.contains(t)) return false;
    return std::any_of(x_intervals.begin(), x_intervals.end(),
                       [x](const Interval& iv) { return iv.contains(x); });
}

FoliationSpec make_foliation(std::string name, ScalarField f, Window window,
                             std::optional<ScalarField> f_t, std::optional<ScalarField> f_x,
                             bool monotone, std::vector<double> t_breakpoints)
{
    FoliationSpec spec;
    spec.name = std::move(name);
    spec.f_t = f_t ? std::move(*f_t) : central_t(f);
    spec.f_x = f_x ? std::move(*f_x) : central_x(f);
    spec.f = std::move(f);
    spec.window = window;
    spec.monotone = monotone;
    std::sort(t_breakpoints.begin(), t_breakpoints.end());
    spec.t_breakpoints = std::move(t_breakpoints);
    return spec;
}

double g_profile(double x)
{
    if (x <= -kA) return -1.0;
    if (x >= kA) return 1.0;
    return std::tanh(std::tan(x));
}

double g_profile_derivative(double x)
{
    if (x <= -kA || x >= kA) return 0.0;
    const double u = std::tan(x);
    // sech^2(u) = 4 e^{-2|u|} / (1 + e^{-2|u|})^2, stable for large |u|
    const double e = std::exp(-2.0 * std::abs(u));
    const double sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    return sech2 * (1.0 + u * u);
}

double appendix_f(double t, double x)
{
    if (t <= -kA) return (t + kA) * 0.5 * (1.0 - g_profile(t + 2.0 * kA)) - 1.0 - g_profile(x);
    if (t <= kA) return g_profile(t) * (1.0 + g_profile(x));
    return (t - kA) * 0.5 * (1.0 + g_profile(t - 2.0 * kA)) + 1.0 + g_profile(x);
}

double appendix_f_t(double t, double x)
{
    if (t <= -kA) {
        const double s = t + 2.0 * kA;
        return 0.5 * (1.0 - g_profile(s)) - (t + kA) * 0.5 * g_profile_derivative(s);
    }
    if (t <= kA) return g_profile_derivative(t) * (1.0 + g_profile(x));
    const double s = t - 2.0 * kA;
    return 0.5 * (1.0 + g_profile(s)) + (t - kA) * 0.5 * g_profile_derivative(s);
}

double appendix_f_x(double t, double x)
{
    if (t <= -kA) return -g_profile_derivative(x);
    if (t <= kA) return g_profile(t) * g_profile_derivative(x);
    return g_profile_derivative(x);
}

double appendix_f2(double t, double x)
{
    if (t <= -2.0) return t + 1.0 - g_profile(x);
    if (t <= 2.0) return 0.5 * t * (1.0 + g_profile(x));
    return t - 1.0 + g_profile(x);
}

double appendix_f2_t(double t, double x)
{
    if (t <= -2.0 || t > 2.0) return 1.0;
    return 0.5 * (1.0 + g_profile(x));
}

double appendix_f2_x(double t, double x)
{
    if (t <= -2.0) return -g_profile_derivative(x);
    if (t <= 2.0) return 0.5 * t * g_profile_derivative(x);
    return g_profile_derivative(x);
}

FoliationSpec flat_foliation()
{
    return make_foliation(
        "flat", [](double t, double) { return t; }, Window{{-10.0, 10.0}, {-50.0, 50.0}},
        ScalarField{[](double, double) { return 1.0; }},
        ScalarField{[](double, double) { return 0.0; }});
}

FoliationSpec appendix_foliation()
{
    auto spec = make_foliation("appendix_f", appendix_f, Window{{-5.0, 5.0}, {-20.0, 20.0}},
                               ScalarField{appendix_f_t}, ScalarField{appendix_f_x});
    spec.plateaus.push_back({{-kA, kA}, {{-std::numeric_limits<double>::infinity(), -kA}}});
    return spec;
}

FoliationSpec appendix_f2_foliation()
{
    auto spec = make_foliation("appendix_f2", appendix_f2, Window{{-5.0, 5.0}, {-20.0, 20.0}},
                               ScalarField{appendix_f2_t}, ScalarField{appendix_f2_x}, true,
                               {-2.0, 2.0});
    spec.plateaus.push_back({{-2.0, 2.0}, {{-std::numeric_limits<double>::infinity(), -kA}}});
    return spec;
}

FoliationSpec backward_example()
{
    return make_foliation(
        "backward", [](double t, double x) { return t * g_profile(x); },
        Window{{-0.9, 0.9}, {-20.0, 20.0}},
        ScalarField{[](double, double x) { return g_profile(x); }},
        ScalarField{[](double t, double x) { return t * g_profile_derivative(x); }}, false);
}

FoliationSpec tilted_foliation(double slope)
{
    return make_foliation(
        "tilted", [slope](double t, double x) { return t + slope * x; },
        Window{{-5.0, 5.0}, {-20.0, 20.0}}, ScalarField{[](double, double) { return 1.0; }},
        ScalarField{[slope](double, double) { return slope; }});
}

FoliationSpec tabulated_foliation(std::string name, std::vector<double> t_grid,
                                  std::vector<double> x_grid,
                                  std::vector<std::vector<double>> values)
{
    if (t_grid.size() < 2 || x_grid.size() < 2)
        throw std::invalid_argument("tabulated foliation needs at least a 2x2 grid");
    if (values.size() != t_grid.size())
        throw std::invalid_argument("tabulated foliation: one row of values per t");
    for (const auto& row : values)
        if (row.size() != x_grid.size())
            throw std::invalid_argument("tabulated foliation: one value per x in every row");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) || !std::is_sorted(x_grid.begin(), x_grid.end()))
        throw std::invalid_argument("tabulated foliation: grids must be increasing");

    const Window window{{t_grid.front(), t_grid.back()}, {x_grid.front(), x_grid.back()}};
    auto f = [tg = t_grid, xg = x_grid, v = std::move(values)](double t, double x) {
        auto locate = [](const std::vector<double>& g, double s) {
            auto it = std::upper_bound(g.begin(), g.end(), s);
            std::size_t i = it == g.begin() ? 0 : static_cast<std::size_t>(it - g.begin()) - 1;
            i = std::min(i, g.size() - 2);
            return std::pair{i, (s - g[i]) / (g[i + 1] - g[i])};
        };
        const auto [i, a] = locate(tg, t);
        const auto [j, b] = locate(xg, x);
        return (1 - a) * (1 - b) * v[i][j] + a * (1 - b) * v[i + 1][j] + (1 - a) * b * v[i][j + 1] +
               a * b * v[i + 1][j + 1];
    };
    auto spec = make_foliation(std::move(name), f, window);
    spec.t_breakpoints.assign(t_grid.begin() + 1, t_grid.end() - 1);
    // Monotonicity is a property of the data; validate() reports it.
    spec.monotone = true;
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
        for (std::size_t j = 0; j < x_grid.size(); ++j)
            if (f(t_grid[i + 1], x_grid[j]) < f(t_grid[i], x_grid[j])) spec.monotone = false;
    return spec;
}

std::array<double, 2> scaled_normal(const FoliationSpec& spec, double t, double x)
{
    return {1.0, -spec.f_x(t, x)};
}

NormalFrame normal_frame(const FoliationSpec& spec, double t, double x)
{
    NormalFrame frame;
    const double fx = spec.f_x(t, x);
    frame.m_cov = {1.0, -fx};
    if (std::abs(fx) > 1.0 - spec.eps_null)
        throw NullLeafPoint("leaf '" + spec.name + "' is null at the requested point", 1.0, -fx);
    frame.sqrt_h = std::sqrt((1.0 - fx) * (1.0 + fx));
    frame.n_cov = {1.0 / frame.sqrt_h, -fx / frame.sqrt_h};
    frame.n_vec = {frame.n_cov[0], -frame.n_cov[1]};
    return frame;
}

bool degeneracy_at(const FoliationSpec& spec, double t, double x)
{
    return std::abs(spec.f_t(t, x)) <= spec.eps_deg;
}

bool ValidationReport::continuity_ok() const
{
    return std::all_of(breakpoint_residuals.begin(), breakpoint_residuals.end(),
                       [](const auto& r) { return r.second <= 1e-6; });
}

ValidationReport validate(const FoliationSpec& spec, GridResolution grid)
{
    ValidationReport report;
    report.declared_monotone = spec.monotone;
    const double t0 = clip_finite(spec.window.t.lo, -10.0);
    const double t1 = clip_finite(spec.window.t.hi, 10.0);
    const double x0 = clip_finite(spec.window.x.lo, -20.0);
    const double x1 = clip_finite(spec.window.x.hi, 20.0);
    const int nt = std::max(grid.nt, 2);
    const int nx = std::max(grid.nx, 2);

    for (int it = 0; it < nt; ++it) {
        const double t = t0 + (t1 - t0) * it / (nt - 1);
        DegeneracyRow row{t, {}};
        bool in_run = false;
        for (int ix = 0; ix < nx; ++ix) {
            const double x = x0 + (x1 - x0) * ix / (nx - 1);
            const double fx = spec.f_x(t, x);
            const double ft = spec.f_t(t, x);
            if (std::abs(fx) > report.max_abs_fx) {
                report.max_abs_fx = std::abs(fx);
                report.max_abs_fx_t = t;
                report.max_abs_fx_x = x;
            }
            if (std::abs(fx) > 1.0 + 1e-12) ++report.spacelike_violations;
            if (std::abs(fx) > 1.0 - spec.eps_null) ++report.null_points;
            report.min_f_t = std::min(report.min_f_t, ft);
            if (ft < -spec.eps_deg) ++report.monotone_violations;

            const bool deg = std::abs(ft) <= spec.eps_deg;
            if (deg && !in_run) {
                row.x_intervals.push_back({x, x});
                in_run = true;
            } else if (deg) {
                row.x_intervals.back().hi = x;
            } else {
                in_run = false;
            }
        }
        if (!row.x_intervals.empty()) report.degeneracy.push_back(std::move(row));
    }

    for (double tb : spec.t_breakpoints) {
        const double delta = 1e-9 * std::max(1.0, std::abs(tb));
        double worst = 0.0;
        for (int ix = 0; ix < nx; ++ix) {
            const double x = x0 + (x1 - x0) * ix / (nx - 1);
            worst = std::max(worst, std::abs(spec.f(tb - delta, x) - spec.f(tb + delta, x)));
        }
        report.breakpoint_residuals.emplace_back(tb, worst);
    }
    return report;
}

ReparamResult reparam_match(const FoliationSpec& a, const FoliationSpec& b, double t,
                            Interval search, double tolerance, int nx)
{
    const double xl = std::max(clip_finite(a.window.x.lo, -20.0), clip_finite(b.window.x.lo, -20.0));
    const double xh = std::min(clip_finite(a.window.x.hi, 20.0), clip_finite(b.window.x.hi, 20.0));
    std::vector<double> xs(static_cast<std::size_t>(nx));
    std::vector<double> target(xs.size());
    for (int i = 0; i < nx; ++i) {
        xs[i] = xl + (xh - xl) * i / (nx - 1);
        target[i] = b.f(t, xs[i]);
    }
    auto sup_residual = [&](double tp) {
        double worst = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            worst = std::max(worst, std::abs(a.f(tp, xs[i]) - target[i]));
        return worst;
    };

    // Coarse scan for a bracket, then golden-section refinement. The objective is a
    // max of quasi-convex functions for monotone A, hence unimodal.
    constexpr int kScan = 64;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
        const double tp = search.lo + search.width() * i / kScan;
        const double v = sup_residual(tp);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    double lo = search.lo + search.width() * std::max(best - 1, 0) / kScan;
    double hi = search.lo + search.width() * std::min(best + 1, kScan) / kScan;

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = sup_residual(c);
    double fd = sup_residual(d);
    const double stop = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo) + std::abs(hi));
    for (int iter = 0; iter < 200 && hi - lo > stop; ++iter) {
        if (fc <= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = sup_residual(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = sup_residual(d);
        }
    }
    ReparamResult result;
    result.t = fc <= fd ? c : d;
    result.sup_residual = std::min(fc, fd);
    if (best_val < result.sup_residual) {
        result.t = search.lo + search.width() * best / kScan;
        result.sup_residual = best_val;
    }
    if (!(result.sup_residual <= tolerance))
        throw NoMatch("no leaf of '" + a.name + "' matches leaf t=" + std::to_string(t) + " of '" +
                      b.name + "' (sup residual " + std::to_string(result.sup_residual) + ")");
    return result;
}

Mesh surface_c_mesh(const FoliationSpec& spec, double x2_fixed, Interval t_range,
                    Interval x_range, int nt, int nx)
{
    Mesh mesh;
    mesh.nt = nt;
    mesh.nx = nx;
    mesh.vertices.reserve(static_cast<std::size_t>(nt * nx));
    for (int it = 0; it < nt; ++it) {
        const double t = t_range.lo + t_range.width() * it / std::max(nt - 1, 1);
        const double x0_2 = spec.f(t, x2_fixed);
        for (int ix = 0; ix < nx; ++ix) {
            const double x = x_range.lo + x_range.width() * ix / std::max(nx - 1, 1);
            mesh.vertices.push_back({t, x, spec.f(t, x), x0_2});
        }
    }
    return mesh;
}

} // namespace hbd
