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

#include "hbd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hbd {

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf)
{
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = std::clamp(cdf(sorted[i]), 0.0, 1.0);
        d = std::max({d, (i + 1) / m - f, f - i / m});
    }
    return d;
}

double ks_critical_value(std::size_t m, double alpha)
{
    if (m == 0) throw std::invalid_argument("ks_critical_value: M must be positive");
    return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(m));
}

double ks_p_value(double d, std::size_t m)
{
    const double sm = std::sqrt(static_cast<double>(m));
    const double lambda = (sm + 0.12 + 0.11 / sm) * d;
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

namespace {

double mean_distance(const std::vector<std::vector<double>>& a, std::size_t na,
                     const std::vector<std::vector<double>>& b, std::size_t nb, bool same)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = same ? i + 1 : 0; j < nb; ++j) {
            double s = 0.0;
            for (std::size_t d = 0; d < a[i].size(); ++d) {
                const double diff = a[i][d] - b[j][d];
                s += diff * diff;
            }
            sum += std::sqrt(s);
            ++count;
        }
    return count ? sum / static_cast<double>(count) : 0.0;
}

} // namespace

double energy_distance(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                       std::size_t max_points)
{
    if (a.empty() || b.empty()) return 0.0;
    const std::size_t na = std::min(a.size(), max_points);
    const std::size_t nb = std::min(b.size(), max_points);
    return 2.0 * mean_distance(a, na, b, nb, false) - mean_distance(a, na, a, na, true) -
           mean_distance(b, nb, b, nb, true);
}

} // namespace hbd
