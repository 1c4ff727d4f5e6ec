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
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace hbd {

// A point (x0, x1) of 1+1 Minkowski space-time, c = hbar = 1, metric diag(+1,-1).
struct Event {
    double x0 = 0.0;
    double x1 = 0.0;
};

// Closed interval; either end may be infinite.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double v) const { return v >= lo && v <= hi; }
    double width() const { return hi - lo; }
};

struct Window {
    Interval t;
    Interval x;

    bool contains(double tt, double xx) const { return t.contains(tt) && x.contains(xx); }
};

// Region where f is t-constant: f_t = 0 on t_interval x each x_interval.
struct DegeneracyRegion {
    Interval t_interval;
    std::vector<Interval> x_intervals;

    bool contains(double t, double x) const;
};

using ScalarField = std::function<double(double t, double x)>;

// Leaf family x0 = f(t, x1).
struct FoliationSpec {
    std::string name;
    ScalarField f;
    ScalarField f_t;
    ScalarField f_x;
    std::vector<double> t_breakpoints;  // sorted; f non-smooth in t there
    bool monotone = true;
    Window window;
    std::vector<DegeneracyRegion> plateaus;  // known analytically, may be empty
    double eps_null = 1e-8;
    double eps_deg = 1e-12;

    Event event(double t, double x) const { return {f(t, x), x}; }
};

inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr double kFiniteDifferenceStep = 1e-6;

// Builds a spec from f alone; missing partials become central differences
// with step kFiniteDifferenceStep.
FoliationSpec make_foliation(std::string name, ScalarField f, Window window,
                             std::optional<ScalarField> f_t = std::nullopt,
                             std::optional<ScalarField> f_x = std::nullopt,
                             bool monotone = true,
                             std::vector<double> t_breakpoints = {});

/// Smooth step: -1 for x <= -pi/2, tanh(tan x) inside, +1 for x >= pi/2.
double g_profile(double x);
double g_profile_derivative(double x);

double appendix_f(double t, double x);
double appendix_f_t(double t, double x);
double appendix_f_x(double t, double x);

double appendix_f2(double t, double x);
double appendix_f2_t(double t, double x);
double appendix_f2_x(double t, double x);

FoliationSpec flat_foliation();
FoliationSpec appendix_foliation();
FoliationSpec appendix_f2_foliation();
// f(t,x) = t g(x) on |t| <= 0.9: leaves move to the past where x < 0.
FoliationSpec backward_example();
// f(t,x) = t + slope x; spacelike only for |slope| <= 1.
FoliationSpec tilted_foliation(double slope);
// Bilinear interpolation of f on a rectangular grid; partials by central differences.
FoliationSpec tabulated_foliation(std::string name, std::vector<double> t_grid,
                                  std::vector<double> x_grid,
                                  std::vector<std::vector<double>> values);

struct NormalFrame {
    std::array<double, 2> m_cov{};  // (1, -f_x)
    std::array<double, 2> n_cov{};
    std::array<double, 2> n_vec{};
    double sqrt_h = 0.0;
};

// Coordinate-scaled normal covector (1, -f_x); finite even at null points.
std::array<double, 2> scaled_normal(const FoliationSpec& spec, double t, double x);

// Throws NullLeafPoint when |f_x| > 1 - eps_null (the exception carries m_cov).
NormalFrame normal_frame(const FoliationSpec& spec, double t, double x);

bool degeneracy_at(const FoliationSpec& spec, double t, double x);

struct GridResolution {
    int nt = 121;
    int nx = 241;
};

struct DegeneracyRow {
    double t = 0.0;
    std::vector<Interval> x_intervals;  // hull of consecutive degenerate grid points
};

struct ValidationReport {
    double max_abs_fx = 0.0;
    double max_abs_fx_t = 0.0;
    double max_abs_fx_x = 0.0;
    double min_f_t = std::numeric_limits<double>::infinity();
    int spacelike_violations = 0;   // |f_x| > 1 + 1e-12
    int null_points = 0;            // |f_x| > 1 - eps_null
    int monotone_violations = 0;    // grid points with f_t < -eps_deg
    std::vector<DegeneracyRow> degeneracy;
    std::vector<std::pair<double, double>> breakpoint_residuals;  // (t_b, max_x |jump|)
    bool declared_monotone = true;

    bool spacelike_ok() const { return spacelike_violations == 0; }
    bool monotone_ok() const { return !declared_monotone || monotone_violations == 0; }
    bool continuity_ok() const;
    bool ok() const { return spacelike_ok() && monotone_ok() && continuity_ok(); }
    bool has_degeneracy() const { return !degeneracy.empty(); }
};

ValidationReport validate(const FoliationSpec& spec, GridResolution grid = {});

struct ReparamResult {
    double t = 0.0;
    double sup_residual = 0.0;
};

// Finds t' with A.f(t', x) closest (sup over an x grid) to B.f(t, x).
// Throws NoMatch when the minimized sup exceeds tolerance.
ReparamResult reparam_match(const FoliationSpec& a, const FoliationSpec& b, double t,
                            Interval search, double tolerance = 1e-6, int nx = 401);

struct MeshVertex {
    double t;
    double x1;
    double x0_1;
    double x0_2;
};

struct Mesh {
    int nt = 0;
    int nx = 0;
    std::vector<MeshVertex> vertices;  // row-major in t

    const MeshVertex& at(int it, int ix) const { return vertices[static_cast<std::size_t>(it * nx + ix)]; }
};

// Cross-section of the surface C at fixed x1 of particle 2: {(f(t,x), x, f(t,x2_fixed))}.
Mesh surface_c_mesh(const FoliationSpec& spec, double x2_fixed, Interval t_range,
                    Interval x_range, int nt, int nx);

} // namespace hbd
