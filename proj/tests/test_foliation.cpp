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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hbd/error.hpp"
#include "hbd/foliation.hpp"
#include "hbd/rng.hpp"

namespace hbd {
namespace {

// Reference values below come from 30-digit evaluations of the closed forms.

TEST(Profile, MatchesHighPrecisionValues)
{
    EXPECT_NEAR(g_profile(1.0), 0.91499949573670780, 1e-15);
    EXPECT_NEAR(g_profile_derivative(0.5), 0.97675765261766896, 1e-15);
    EXPECT_DOUBLE_EQ(g_profile(0.0), 0.0);
    EXPECT_DOUBLE_EQ(g_profile_derivative(0.0), 1.0);
}

TEST(Profile, FlatOutsideTheStrip)
{
    for (double x : {-10.0, -3.0, -kHalfPi}) {
        EXPECT_EQ(g_profile(x), -1.0);
        EXPECT_EQ(g_profile_derivative(x), 0.0);
    }
    for (double x : {kHalfPi, 2.0, 10.0}) {
        EXPECT_EQ(g_profile(x), 1.0);
        EXPECT_EQ(g_profile_derivative(x), 0.0);
    }
}

TEST(Profile, OddMonotoneAndDerivativeConsistent)
{
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const double x = rng.uniform(-1.5, 1.5);
        EXPECT_NEAR(g_profile(-x), -g_profile(x), 1e-15);
        const double h = 1e-6;
        const double fd = (g_profile(x + h) - g_profile(x - h)) / (2 * h);
        EXPECT_NEAR(g_profile_derivative(x), fd, 1e-6 * std::max(1.0, std::abs(fd)));
        EXPECT_GE(g_profile_derivative(x), 0.0);
    }
}

TEST(AppendixF, MatchesHighPrecisionValues)
{
    EXPECT_NEAR(appendix_f(-3.0, 0.3), -1.9132553338582737, 1e-14);
    EXPECT_NEAR(appendix_f(0.7, -0.2), 0.54963024234815358, 1e-14);
    EXPECT_NEAR(appendix_f(3.0, 1.0), 2.5284216914516525, 1e-14);
    EXPECT_NEAR(appendix_f(2.0, 0.4), 1.4046426557235678, 1e-14);
    EXPECT_EQ(appendix_f(-1.0, -2.0), 0.0);
}

TEST(AppendixF, ContinuousAcrossBranches)
{
    const auto spec = appendix_foliation();
    for (double tb : {-kHalfPi, kHalfPi})
        for (double x = -4.0; x <= 4.0; x += 0.25)
            EXPECT_NEAR(spec.f(std::nextafter(tb, -10.0), x), spec.f(std::nextafter(tb, 10.0), x), 1e-12);
}

TEST(AppendixF, PartialsAgreeWithDifferences)
{
    const auto spec = appendix_foliation();
    Rng rng(5);
    for (int i = 0; i < 300; ++i) {
        const double t = rng.uniform(-4.0, 4.0);
        const double x = rng.uniform(-3.0, 3.0);
        if (std::abs(std::abs(t) - kHalfPi) < 1e-3) continue;
        const double h = 1e-6;
        EXPECT_NEAR(spec.f_t(t, x), (spec.f(t + h, x) - spec.f(t - h, x)) / (2 * h), 1e-6);
        EXPECT_NEAR(spec.f_x(t, x), (spec.f(t, x + h) - spec.f(t, x - h)) / (2 * h), 1e-6);
    }
}

TEST(AppendixF, PlateauIsExactlyFrozen)
{
    const auto spec = appendix_foliation();
    for (double t = -kHalfPi; t <= kHalfPi; t += 0.1)
        for (double x : {-20.0, -5.0, -kHalfPi}) {
            EXPECT_EQ(spec.f_t(t, x), 0.0);
            EXPECT_EQ(spec.f(t, x), 0.0);
            EXPECT_TRUE(degeneracy_at(spec, t, x));
        }
    EXPECT_FALSE(degeneracy_at(spec, 0.0, 3.0));
    ASSERT_EQ(spec.plateaus.size(), 1u);
    EXPECT_TRUE(spec.plateaus[0].contains(0.3, -2.0));
    EXPECT_FALSE(spec.plateaus[0].contains(2.0, -2.0));
}

TEST(AppendixF2, BranchValues)
{
    EXPECT_DOUBLE_EQ(appendix_f2(-3.0, -2.0), -1.0);
    EXPECT_DOUBLE_EQ(appendix_f2(3.0, 2.0), 3.0);
    EXPECT_DOUBLE_EQ(appendix_f2(1.0, -2.0), 0.0);
    EXPECT_DOUBLE_EQ(appendix_f2(1.0, 2.0), 1.0);
    const auto spec = appendix_f2_foliation();
    for (double x = -3.0; x <= 3.0; x += 0.5) {
        EXPECT_NEAR(spec.f(std::nextafter(-2.0, -3.0), x), spec.f(std::nextafter(-2.0, 0.0), x), 1e-12);
        EXPECT_NEAR(spec.f(std::nextafter(2.0, 0.0), x), spec.f(std::nextafter(2.0, 3.0), x), 1e-12);
    }
}

TEST(Normal, TiltedLeafFrame)
{
    const auto spec = tilted_foliation(0.6);
    const NormalFrame frame = normal_frame(spec, 0.0, 1.0);
    EXPECT_NEAR(frame.sqrt_h, 0.8, 1e-15);
    EXPECT_NEAR(frame.n_cov[0], 1.25, 1e-15);
    EXPECT_NEAR(frame.n_cov[1], -0.75, 1e-15);
    EXPECT_NEAR(frame.n_vec[0], 1.25, 1e-15);
    EXPECT_NEAR(frame.n_vec[1], 0.75, 1e-15);
    // Unit and future pointing.
    EXPECT_NEAR(frame.n_vec[0] * frame.n_vec[0] - frame.n_vec[1] * frame.n_vec[1], 1.0, 1e-14);
    EXPECT_EQ(frame.m_cov[1], -0.6);
}

TEST(Normal, NullPointCarriesScaledCovector)
{
    const auto spec = appendix_foliation();
    try {
        normal_frame(spec, 3.0, 0.0);
        FAIL() << "expected NullLeafPoint";
    } catch (const NullLeafPoint& e) {
        EXPECT_EQ(e.m_cov[0], 1.0);
        EXPECT_NEAR(std::abs(e.m_cov[1]), 1.0, 1e-12);
    }
    const auto m = scaled_normal(spec, 3.0, 0.0);
    EXPECT_EQ(m[0], 1.0);
    EXPECT_NEAR(m[1], -1.0, 1e-12);
    // Outer branches: f_x = +g'(x) after the plateau, -g'(x) before it.
    EXPECT_THROW(normal_frame(spec, 2.0, 0.0), NullLeafPoint);
    EXPECT_THROW(normal_frame(spec, -2.0, 0.0), NullLeafPoint);
    EXPECT_NEAR(scaled_normal(spec, 2.0, 0.0)[1], -1.0, 1e-12);
    EXPECT_NEAR(scaled_normal(spec, -2.0, 0.0)[1], 1.0, 1e-12);
}

TEST(Validate, AppendixPassesWithDegeneracy)
{
    const auto report = validate(appendix_foliation());
    EXPECT_TRUE(report.ok());
    EXPECT_TRUE(report.has_degeneracy());
    EXPECT_EQ(report.spacelike_violations, 0);
    EXPECT_GT(report.null_points, 0);
    bool saw_origin = false;
    for (const auto& row : report.degeneracy)
        if (std::abs(row.t) < 1e-9) {
            saw_origin = true;
            ASSERT_FALSE(row.x_intervals.empty());
            EXPECT_EQ(row.x_intervals.front().lo, -20.0);
            EXPECT_LT(row.x_intervals.front().hi, -1.4);
        }
    EXPECT_TRUE(saw_origin);
}

TEST(Validate, OtherBuiltins)
{
    EXPECT_TRUE(validate(flat_foliation()).ok());
    EXPECT_FALSE(validate(flat_foliation()).has_degeneracy());
    EXPECT_TRUE(validate(appendix_f2_foliation()).ok());
    const auto back = validate(backward_example());
    EXPECT_FALSE(back.declared_monotone);
    EXPECT_GT(back.monotone_violations, 0);
    EXPECT_TRUE(back.ok());
}

TEST(Validate, SteepTiltFails)
{
    const auto report = validate(tilted_foliation(2.0));
    EXPECT_FALSE(report.ok());
    EXPECT_GT(report.spacelike_violations, 0);
    EXPECT_NEAR(report.max_abs_fx, 2.0, 1e-12);
}

TEST(Validate, MonotoneClaimIsChecked)
{
    auto spec = backward_example();
    spec.monotone = true;
    EXPECT_FALSE(validate(spec).ok());
}

TEST(Validate, DiscontinuityIsReported)
{
    auto spec = make_foliation(
        "jump", [](double t, double x) { return t < 0 ? t : t + 0.1 + 0.0 * x; }, Window{{-1, 1}, {-1, 1}},
        std::nullopt, std::nullopt, true, {0.0});
    EXPECT_FALSE(validate(spec).continuity_ok());
}

TEST(Reparam, AppendixAgainstSecondParametrization)
{
    const auto a = appendix_foliation();
    const auto b = appendix_f2_foliation();
    const auto middle = reparam_match(a, b, 1.0, {-5.0, 5.0});
    EXPECT_NEAR(middle.t, 0.50231034416915583, 1e-7);
    EXPECT_LT(middle.sup_residual, 1e-6);
    const auto outer = reparam_match(a, b, 3.0, {-5.0, 5.0});
    EXPECT_NEAR(outer.t, 3.2989222222235417, 1e-7);
    const auto origin = reparam_match(a, b, 0.0, {-5.0, 5.0});
    EXPECT_NEAR(origin.t, 0.0, 1e-7);
    const auto neg = reparam_match(a, b, -3.0, {-5.0, 5.0});
    EXPECT_NEAR(neg.t, -outer.t, 1e-7);
}

TEST(Reparam, NoMatchForUnrelatedFoliation)
{
    EXPECT_THROW(reparam_match(flat_foliation(), appendix_foliation(), 1.0, {-5.0, 5.0}), NoMatch);
}

TEST(Tabulated, ReproducesBilinearData)
{
    std::vector<double> ts{-1.0, 0.0, 1.0};
    std::vector<double> xs{-2.0, 0.0, 2.0};
    std::vector<std::vector<double>> v;
    for (double t : ts) {
        std::vector<double> row;
        for (double x : xs) row.push_back(t + 0.25 * x);
        v.push_back(row);
    }
    const auto spec = tabulated_foliation("grid", ts, xs, v);
    EXPECT_NEAR(spec.f(0.5, 1.0), 0.75, 1e-14);
    EXPECT_NEAR(spec.f_t(0.3, 0.7), 1.0, 1e-8);
    EXPECT_NEAR(spec.f_x(0.3, 0.7), 0.25, 1e-8);
    EXPECT_TRUE(validate(spec).ok());
    EXPECT_THROW(tabulated_foliation("bad", ts, xs, {{1.0}}), std::invalid_argument);
}

TEST(SurfaceC, MeshSections)
{
    const auto spec = appendix_foliation();
    const Mesh left = surface_c_mesh(spec, -2.0, {-3.0, 3.0}, {-3.0, 3.0}, 7, 9);
    const Mesh right = surface_c_mesh(spec, 3.0, {-3.0, 3.0}, {-3.0, 3.0}, 7, 9);
    ASSERT_EQ(left.vertices.size(), 63u);
    EXPECT_EQ(left.at(3, 4).x1, 0.0);
    // Particle 2 at x = -2 stays on the plateau while the middle leaves sweep by.
    EXPECT_EQ(left.at(3, 0).x0_2, 0.0);
    EXPECT_NE(right.at(2, 0).x0_2, left.at(2, 0).x0_2);
    for (const auto& v : right.vertices) EXPECT_DOUBLE_EQ(v.x0_1, spec.f(v.t, v.x1));
}

} // namespace
} // namespace hbd
