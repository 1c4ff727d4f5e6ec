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
#include "hbd/quadrature.hpp"

namespace hbd {
namespace {

TEST(GaussLegendre, ThreePointRule)
{
    const auto r = gauss_legendre(3);
    EXPECT_NEAR(r.nodes[0], -std::sqrt(0.6), 1e-15);
    EXPECT_NEAR(r.nodes[1], 0.0, 1e-15);
    EXPECT_NEAR(r.nodes[2], std::sqrt(0.6), 1e-15);
    EXPECT_NEAR(r.weights[0], 5.0 / 9.0, 1e-15);
    EXPECT_NEAR(r.weights[1], 8.0 / 9.0, 1e-15);
}

TEST(GaussLegendre, ExactForDegree2nMinus1)
{
    for (int n : {1, 2, 5, 8, 16}) {
        const auto r = gauss_legendre(n);
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
            const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
            EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " p=" << p;
        }
    }
    EXPECT_THROW(gauss_legendre(0), BadQuadrature);
}

TEST(Composite, UniformRuleIntegratesSmoothFunction)
{
    const auto rule = uniform_rule({0.0, std::numbers::pi}, 16, 8);
    EXPECT_NEAR(rule.integrate([](double x) { return std::sin(x); }), 2.0, 1e-14);
    EXPECT_EQ(rule.x.size(), 128u);
}

TEST(Adaptive, RefinesNarrowPeak)
{
    auto peak = [](double x) { return std::exp(-x * x / (2 * 1e-4)); };
    const auto rule = adaptive_rule(peak, {-5.0, 5.0}, 8, 1e-12, 8);
    EXPECT_NEAR(rule.integrate(peak), std::sqrt(2 * std::numbers::pi * 1e-4), 1e-12);
    EXPECT_GT(rule.edges.size(), 9u);
}

TEST(Adaptive, KeepsForcedEdges)
{
    const auto rule = adaptive_rule([](double x) { return std::abs(x - 0.3); }, {-1.0, 1.0}, 4, 1e-10, 4, 12, {0.3});
    EXPECT_NE(std::find(rule.edges.begin(), rule.edges.end(), 0.3), rule.edges.end());
    EXPECT_NEAR(rule.integrate([](double x) { return std::abs(x - 0.3); }), 0.5 * (1.3 * 1.3 + 0.7 * 0.7), 1e-13);
    EXPECT_THROW(adaptive_rule([](double) { return 1.0; }, {0.0, INFINITY}, 4, 1e-8), BadQuadrature);
}

} // namespace
} // namespace hbd
