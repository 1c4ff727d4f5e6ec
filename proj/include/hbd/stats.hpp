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

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hbd {

// One-sample Kolmogorov-Smirnov statistic sup |F_M - F| against a continuous CDF.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

// Asymptotic critical value sqrt(-ln(alpha/2)/2)/sqrt(M); 1.63/sqrt(M) at alpha = 0.01.
double ks_critical_value(std::size_t m, double alpha = 0.01);

// Asymptotic p-value of the Kolmogorov distribution for statistic d with M samples.
double ks_p_value(double d, std::size_t m);

// Energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| between two point clouds in R^d
// (rows are points). Uses at most max_points rows of each set. Within-set means skip
// the diagonal, so the estimate is unbiased and can be slightly negative.
double energy_distance(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                       std::size_t max_points = 2000);

} // namespace hbd
