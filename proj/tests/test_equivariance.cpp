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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "hbd/dirac.hpp"
#include "hbd/dynamics.hpp"
#include "hbd/equivariance.hpp"
#include "hbd/error.hpp"
#include "hbd/foliation.hpp"
#include "hbd/quadrature.hpp"
#include "hbd/stats.hpp"

namespace hbd {
namespace {

constexpr double kA = std::numbers::pi / 2;
const std::vector<Interval> kWindows{{-12.0, 2.0}, {-10.0, 16.0}};

MultiTimeWave packets(bool entangled)
{
    const double c = entangled ? 1.0 / std::sqrt(2.0) : 1.0;
    std::vector<ProductTerm> terms{
        {{c, 0.0}, {gaussian_packet(1.0, 0.5, 0.6, 64, 3.6, -5.0), gaussian_packet(1.0, 1.5, 0.6, 64, 3.6, 3.0)}}};
    if (entangled)
        terms.push_back({{c, 0.0},
                         {gaussian_packet(1.0, -0.5, 0.6, 64, 3.6, -5.0), gaussian_packet(1.0, 0.5, 0.6, 64, 3.6, 3.0)}});
    return MultiTimeWave({1.0, 1.0}, std::move(terms));
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

// Pointwise contraction on a dense tensor grid, with no use of the overlap factorisation.
double brute_force_z(const MultiTimeWave& psi, const FoliationSpec& spec, double t)
{
    const std::vector<NodeSet> rules{uniform_rule(kWindows[0], 150, 8), uniform_rule(kWindows[1], 260, 8)};
    // Per-slot factor spinors at every node, one per product term.
    std::vector<std::vector<std::vector<Spinor>>> factors(2);
    std::vector<std::vector<Covector>> normals(2);
    for (int k = 0; k < 2; ++k)
        for (double x : rules[k].x) {
            std::vector<Spinor> per_term;
            for (const auto& term : psi.terms()) per_term.push_back(term.factors[k](spec.event(t, x)));
            factors[k].push_back(per_term);
            normals[k].push_back({1.0, -spec.f_x(t, x)});
        }
    double z = 0.0;
    for (std::size_t i = 0; i < rules[0].x.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < rules[1].x.size(); ++j) {
            Eigen::VectorXcd state = Eigen::VectorXcd::Zero(4);
            for (std::size_t a = 0; a < psi.terms().size(); ++a)
                state += psi.terms()[a].coeff * tensor_product(std::vector<Spinor>{factors[0][i][a], factors[1][j][a]});
            const std::vector<Covector> m{normals[0][i], normals[1][j]};
            row += rules[1].w[j] * full_contraction(state, 2, m);
        }
        z += rules[0].w[i] * row;
    }
    return z;
}

TEST(LeafDensity, SeparableNormalisationMatchesTensorGrid)
{
    const auto psi = packets(true);
    for (const auto& spec : {appendix_foliation(), tilted_foliation(0.4)}) {
        const LeafDensity ld(psi, spec, 0.5, kWindows);
        EXPECT_NEAR(ld.z() / brute_force_z(psi, spec, 0.5), 1.0, 1e-9) << spec.name;
        EXPECT_FALSE(ld.normalization().warning);
        EXPECT_LT(ld.normalization().error_estimate, 1e-8);
        EXPECT_NEAR(normalize(psi, spec, 0.5, kWindows).z, ld.z(), 1e-12 * ld.z());
    }
}

TEST(LeafDensity, ProductStateFactorises)
{
    const auto psi = packets(false);
    const auto spec = appendix_foliation();
    const LeafDensity ld(psi, spec, 0.3, kWindows);
    for (double x1 : {-6.0, -5.0, -4.2})
        for (double x2 : {2.0, 3.1, 4.5}) {
            const std::vector<double> xs{x1, x2};
            EXPECT_NEAR(ld.density(xs), ld.marginal_density(0, x1) * ld.marginal_density(1, x2),
                        1e-10 * ld.density(xs));
        }
}

TEST(LeafDensity, MarginalCdfIsConsistent)
{
    const auto psi = packets(true);
    const auto spec = appendix_foliation();
    const LeafDensity ld(psi, spec, -0.8, kWindows);
    for (int slot = 0; slot < 2; ++slot) {
        EXPECT_NEAR(ld.marginal_cdf(slot, kWindows[slot].lo), 0.0, 1e-14);
        EXPECT_NEAR(ld.marginal_cdf(slot, kWindows[slot].hi), 1.0, 1e-12);
        double prev = 0.0;
        for (double x : linspace(kWindows[slot].lo, kWindows[slot].hi, 101)) {
            const double c = ld.marginal_cdf(slot, x);
            EXPECT_GE(c, prev - 1e-15);
            prev = c;
        }
        for (double x : {-5.3, -4.7, 2.6, 3.4}) {
            if (!kWindows[slot].contains(x)) continue;
            const double h = 1e-4;
            const double fd = (ld.marginal_cdf(slot, x + h) - ld.marginal_cdf(slot, x - h)) / (2 * h);
            EXPECT_NEAR(fd, ld.marginal_density(slot, x), 1e-6);
            EXPECT_NEAR(ld.partial_integral(slot, x) / ld.z(), ld.marginal_density(slot, x), 1e-12);
        }
    }
}

TEST(Sampling, DeterministicOnLeafAndInsideWindows)
{
    const auto psi = packets(true);
    const auto spec = appendix_foliation();
    const LeafDensity ld(psi, spec, -2.0, kWindows);
    const auto a = sample(ld, 200, 42);
    const auto b = sample(ld, 200, 42);
    const auto c = sample(ld, 200, 43);
    ASSERT_EQ(a.configs.size(), 200u);
    EXPECT_GT(a.acceptance(), 0.0);
    EXPECT_LE(a.acceptance(), 1.0);
    bool differs = false;
    for (std::size_t i = 0; i < a.configs.size(); ++i) {
        for (int k = 0; k < 2; ++k) {
            EXPECT_EQ(a.configs[i].points[k].x1, b.configs[i].points[k].x1);
            EXPECT_TRUE(kWindows[k].contains(a.configs[i].points[k].x1));
            differs = differs || a.configs[i].points[k].x1 != c.configs[i].points[k].x1;
        }
        EXPECT_EQ(a.configs[i].max_on_leaf_residual(spec), 0.0);
    }
    EXPECT_TRUE(differs);
    EXPECT_TRUE(sample(ld, 0, 42).configs.empty());
}

TEST(Sampling, KsAcceptsOwnDensityAndRejectsShift)
{
    const auto psi = packets(true);
    const auto spec = appendix_foliation();
    const LeafDensity ld(psi, spec, 1.0, kWindows);
    auto ens = sample(ld, 2000, 3).configs;
    const auto own = compare(ens, ld, 99);
    for (double ks : own.ks) EXPECT_LT(ks, own.ks_critical);
    EXPECT_NEAR(own.ks_critical, ks_critical_value(2000), 1e-15);
    for (auto& c : ens) c.points[1].x1 += 0.3;
    const auto shifted = compare(ens, ld, 99);
    EXPECT_LT(shifted.ks[0], shifted.ks_critical);
    EXPECT_GT(shifted.ks[1], 3 * shifted.ks_critical);
    EXPECT_GT(shifted.energy, own.energy);
    EXPECT_EQ(compare({}, ld, 1).ks[0], 1.0);
}

TEST(Conservation, TotalProbabilityConstantOnFlatAndAppendixLeaves)
{
    const auto psi = packets(true);
    const auto t = linspace(-2.0, 2.0, 9);
    for (const auto& spec : {flat_foliation(), appendix_foliation()}) {
        const auto scan = total_probability_scan(psi, spec, t, kWindows);
        ASSERT_EQ(scan.z.size(), t.size());
        EXPECT_LT(scan.max_drift, 1e-6) << spec.name;
    }
}

TEST(NoSignaling, FrozenMarginalIndependentOfLeaf)
{
    const auto spec = appendix_foliation();
    const std::vector<double> ts{-1.0, 0.0, 1.0};
    const auto probes = linspace(-7.5, -2.5, 5);
    for (bool ent : {false, true})
        EXPECT_LT(no_signaling_marginal(packets(ent), spec, {-20.0, -kA}, ts, probes, kWindows), 1e-6);
    const std::vector<double> bad{-1.0};
    EXPECT_THROW(no_signaling_marginal(packets(true), spec, {-20.0, -kA}, ts, bad, kWindows), PreconditionError);
    const std::vector<double> late{0.0, 3.0};
    EXPECT_THROW(no_signaling_marginal(packets(true), spec, {-20.0, -kA}, late, probes, kWindows), PreconditionError);
}

TEST(Transport, IndependentOfThreadCount)
{
    const auto psi = packets(true);
    const auto spec = appendix_foliation();
    const LeafDensity ld(psi, spec, -2.0, kWindows);
    const auto s = sample(ld, 24, 8).configs;
    TransportOptions one;
    one.integrator.windows = kWindows;
    one.probe_times = {-kA, kA};
    TransportOptions three = one;
    three.threads = 3;
    const auto a = transport(s, psi, spec, -2.0, 2.0, one);
    const auto b = transport(s, psi, spec, -2.0, 2.0, three);
    ASSERT_EQ(a.final.size(), b.final.size());
    EXPECT_EQ(a.node_reference, b.node_reference);
    for (std::size_t i = 0; i < a.final.size(); ++i)
        for (int k = 0; k < 2; ++k) EXPECT_EQ(a.final[i].points[k].x1, b.final[i].points[k].x1);
    EXPECT_EQ(a.kink_counts, b.kink_counts);
    EXPECT_EQ(a.causal_violations, 0);
    // A particle left of the plateau at both probe times has not moved.
    for (const auto& p : a.probes)
        if (p[0] < -kA) {
            EXPECT_EQ(p[0], p[2]);
        }
}

TEST(Gates, ThresholdsAndOutcomes)
{
    EXPECT_NEAR(ks_gate(5000), 0.03, 1e-15);
    EXPECT_NEAR(ks_gate(1250), 0.053, 1e-15);
    EnsembleReport r;
    r.m = 5000;
    r.ks_per_marginal = {0.01, 0.02};
    auto all = [](const std::vector<GateOutcome>& g) {
        return std::all_of(g.begin(), g.end(), [](const auto& o) { return o.pass; });
    };
    EXPECT_TRUE(all(evaluate_gates(r)));
    r.node_aborts = 2;
    r.window_exits = 2;
    EXPECT_TRUE(all(evaluate_gates(r)));
    // The loss budget is strictly below 0.1% of M.
    r.window_exits = 3;
    EXPECT_FALSE(all(evaluate_gates(r)));
    r.window_exits = 0;
    r.causal_violations = 1;
    EXPECT_FALSE(all(evaluate_gates(r)));
    r.causal_violations = 0;
    r.ks_per_marginal[1] = 0.031;
    EXPECT_FALSE(all(evaluate_gates(r)));
    r.ks_per_marginal[1] = 0.0;
    r.total_prob_drift = 2e-4;
    EXPECT_FALSE(all(evaluate_gates(r)));
}

TEST(Report, SerialisationsAgree)
{
    EnsembleReport r;
    r.m = 10;
    r.ks_per_marginal = {0.125, 0.5};
    r.causal_violations = 2;
    const auto header = r.csv_header();
    const auto row = r.csv_row();
    EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
    EXPECT_EQ(header.rfind("m,ks_0,ks_1,", 0), 0u);
    EXPECT_EQ(row.rfind("10,0.125,0.5,", 0), 0u);
    EXPECT_NE(r.key_value().find("causal_violations = 2\n"), std::string::npos);
}

TEST(Ensemble, SmallFlatRunPasses)
{
    const auto psi = packets(true);
    EnsembleSetup setup;
    setup.windows = kWindows;
    setup.m = 300;
    setup.seed = 4;
    setup.t0 = 0.0;
    setup.t1 = 1.0;
    setup.z_points = 5;
    const auto run = run_ensemble(psi, flat_foliation(), setup);
    EXPECT_TRUE(run.pass) << run.report.key_value();
    EXPECT_EQ(run.report.m, 300u);
    EXPECT_EQ(run.transported.final.size(), 300u);
    EXPECT_EQ(run.scan.t.size(), 5u);
}

} // namespace
} // namespace hbd
