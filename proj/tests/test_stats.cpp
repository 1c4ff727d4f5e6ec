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
#include <vector>

#include <gtest/gtest.h>

#include "hbd/rng.hpp"
#include "hbd/stats.hpp"

namespace hbd {
namespace {

TEST(Ks, HandComputedStatistic)
{
    // Uniform CDF; the largest gap is at 0.3, where F_M reaches 0.75.
    const std::vector<double> xs{0.1, 0.2, 0.3, 0.9};
    const double d = ks_statistic(xs, [](double x) { return x; });
    EXPECT_NEAR(d, 0.45, 1e-15);
}

TEST(Ks, SingleSample)
{
    const std::vector<double> one{0.25};
    EXPECT_NEAR(ks_statistic(one, [](double x) { return x; }), 0.75, 1e-15);
    EXPECT_THROW(ks_statistic(std::vector<double>{}, [](double x) { return x; }), std::invalid_argument);
}

TEST(Ks, CriticalValue)
{
    EXPECT_NEAR(ks_critical_value(5000), 0.02301807413001365, 1e-15);
    EXPECT_NEAR(ks_critical_value(5000) * std::sqrt(5000.0), 1.6276, 1e-4);
    EXPECT_NEAR(ks_p_value(1.36 / std::sqrt(1e8), 100000000), 0.0494814833252547, 1e-12);
}

TEST(Ks, UniformSampleCalibration)
{
    // Under the null, the statistic exceeds the alpha = 0.01 value in about 1% of runs.
    int exceed = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        Rng rng(seed);
        std::vector<double> xs(500);
        for (auto& x : xs) x = rng.uniform();
        if (ks_statistic(xs, [](double x) { return x; }) > ks_critical_value(500)) ++exceed;
    }
    EXPECT_LE(exceed, 8);
}

TEST(Energy, ZeroForIdenticalSetsPositiveForShifted)
{
    Rng rng(9);
    std::vector<std::vector<double>> a, b;
    for (int i = 0; i < 300; ++i) {
        const double x = rng.uniform(), y = rng.uniform();
        a.push_back({x, y});
        b.push_back({x + 1.0, y});
    }
    EXPECT_NEAR(energy_distance(a, a), 0.0, 0.02);
    EXPECT_GT(energy_distance(a, b), 1.0);
}

TEST(RngStream, DeterministicAndInRange)
{
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

} // namespace
} // namespace hbd
