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

#include "hbd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "hbd/error.hpp"

namespace hbd {

GaussLegendreRule gauss_legendre(int n)
{
    if (n < 1) throw BadQuadrature("gauss_legendre: order must be positive");
    static std::mutex mutex;
    static std::map<int, GaussLegendreRule> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }

    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess.
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;

    std::lock_guard lock(mutex);
    cache.emplace(n, rule);
    return rule;
}

double NodeSet::integrate(const std::function<double(double)>& fn) const
{
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * fn(x[i]);
    return sum;
}

NodeSet composite_rule(const std::vector<double>& edges, int order)
{
    if (edges.size() < 2) throw BadQuadrature("composite_rule: need at least one panel");
    const auto rule = gauss_legendre(order);
    NodeSet set;
    set.order = order;
    set.edges = edges;
    set.x.reserve((edges.size() - 1) * rule.nodes.size());
    set.w.reserve(set.x.capacity());
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double mid = 0.5 * (edges[p] + edges[p + 1]);
        const double half = 0.5 * (edges[p + 1] - edges[p]);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            set.x.push_back(mid + half * rule.nodes[i]);
            set.w.push_back(half * rule.weights[i]);
        }
    }
    return set;
}

NodeSet uniform_rule(Interval range, int panels, int order)
{
    if (panels < 1) throw BadQuadrature("uniform_rule: need at least one panel");
    std::vector<double> edges(static_cast<std::size_t>(panels + 1));
    for (int p = 0; p <= panels; ++p) edges[p] = range.lo + range.width() * p / panels;
    edges.back() = range.hi;
    return composite_rule(edges, order);
}

NodeSet adaptive_rule(const std::function<double(double)>& fn, Interval range, int order,
                      double rel_tol, int initial_panels, int max_depth,
                      std::vector<double> forced_edges)
{
    if (!std::isfinite(range.lo) || !std::isfinite(range.hi) || !(range.hi > range.lo))
        throw BadQuadrature("adaptive_rule: range must be finite and non-empty");
    const auto rule = gauss_legendre(order);
    auto panel_integral = [&](double a, double b, double& abs_sum) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        abs_sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double v = half * rule.weights[i] * fn(mid + half * rule.nodes[i]);
            s += v;
            abs_sum += std::abs(v);
        }
        return s;
    };

    std::vector<double> edges;
    for (int p = 0; p <= initial_panels; ++p) edges.push_back(range.lo + range.width() * p / initial_panels);
    for (double e : forced_edges)
        if (e > range.lo && e < range.hi) edges.push_back(e);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    double total_abs = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        double a;
        panel_integral(edges[p], edges[p + 1], a);
        total_abs += a;
    }
    const double abs_tol = rel_tol * std::max(total_abs, 1e-300) / std::max<std::size_t>(edges.size(), 1);

    std::vector<double> refined;
    std::function<void(double, double, int)> refine = [&](double a, double b, int depth) {
        double abs_whole, abs_l, abs_r;
        const double whole = panel_integral(a, b, abs_whole);
        const double m = 0.5 * (a + b);
        const double halves = panel_integral(a, m, abs_l) + panel_integral(m, b, abs_r);
        if (depth >= max_depth || std::abs(whole - halves) <= abs_tol) {
            refined.push_back(a);
            return;
        }
        refine(a, m, depth + 1);
        refine(m, b, depth + 1);
    };
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) refine(edges[p], edges[p + 1], 0);
    refined.push_back(range.hi);
    return composite_rule(refined, order);
}

} // namespace hbd
