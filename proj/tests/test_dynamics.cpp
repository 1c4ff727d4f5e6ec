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
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "hbd/dirac.hpp"
#include "hbd/dynamics.hpp"
#include "hbd/error.hpp"
#include "hbd/foliation.hpp"
#include "hbd/rng.hpp"

namespace hbd {
namespace {

constexpr double kA = std::numbers::pi / 2;

MultiTimeWave plane_pair(double k1, double k2)
{
    return MultiTimeWave::product({SingleParticleWave(1.0, {{k1, EnergySign::Positive, {1.0, 0.0}}}),
                                   SingleParticleWave(1.0, {{k2, EnergySign::Positive, {1.0, 0.0}}})});
}

MultiTimeWave entangled_packets(bool entangled)
{
    const double c = entangled ? 1.0 / std::sqrt(2.0) : 1.0;
    const auto a1 = gaussian_packet(1.0, 0.5, 0.6, 64, 3.6, -5.0);
    const auto b1 = gaussian_packet(1.0, 1.5, 0.6, 64, 3.6, 3.0);
    std::vector<ProductTerm> terms{{{c, 0.0}, {a1, b1}}};
    if (entangled)
        terms.push_back({{c, 0.0},
                         {gaussian_packet(1.0, -0.5, 0.6, 64, 3.6, -5.0), gaussian_packet(1.0, 0.5, 0.6, 64, 3.6, 3.0)}});
    return MultiTimeWave({1.0, 1.0}, std::move(terms));
}

Trajectory fabricated(std::vector<Event> pts)
{
    Trajectory traj;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        TrajectorySample s;
        s.t = static_cast<double>(i);
        s.points = {pts[i]};
        s.v_before = s.v_after = {{0.0, 0.0}};
        s.on_plateau = {0};
        traj.samples.push_back(s);
    }
    return traj;
}

TEST(Velocity, FlatPlaneWavesMoveAtGroupVelocity)
{
    const auto psi = plane_pair(0.75, -2.0);
    const auto flat = flat_foliation();
    const std::vector<double> x0{-1.0, 2.0};
    const auto traj = integrate(psi, flat, 0.0, x0, 2.0);
    ASSERT_EQ(traj.status, TrajectoryStatus::Completed);
    const auto& last = traj.samples.back();
    EXPECT_DOUBLE_EQ(last.t, 2.0);
    EXPECT_NEAR(last.points[0].x1, -1.0 + 2.0 * 0.75 / 1.25, 1e-10);
    EXPECT_NEAR(last.points[1].x1, 2.0 - 2.0 * 2.0 / std::sqrt(5.0), 1e-10);
    EXPECT_NEAR(last.points[0].x0, 2.0, 1e-15);
}

TEST(Velocity, ExactlyZeroOnDegenerateRegion)
{
    const auto psi = entangled_packets(true);
    const auto spec = appendix_foliation();
    const std::vector<double> xs{-3.0, 1.0};
    const auto v = config_velocity(psi, spec, on_leaf(spec, 0.0, xs));
    EXPECT_EQ(v[0][0], 0.0);
    EXPECT_EQ(v[0][1], 0.0);
    EXPECT_NE(v[1][1], 0.0);
    // The particle on the moving part follows its leaf: v0 = f_t + f_x v1.
    EXPECT_NEAR(v[1][0], spec.f_t(0.0, 1.0) + spec.f_x(0.0, 1.0) * v[1][1], 1e-14);
    EXPECT_LE(std::abs(v[1][1]), std::abs(v[1][0]));
}

TEST(Velocity, NodeRaises)
{
    const auto zero = MultiTimeWave::product({SingleParticleWave(1.0, {{0.5, EnergySign::Positive, {0.0, 0.0}}})});
    const auto flat = flat_foliation();
    const std::vector<double> xs{0.0};
    EXPECT_THROW(config_velocity(zero, flat, on_leaf(flat, 0.0, xs)), NodeError);
    IntegratorOptions opts;
    opts.node_reference = 1.0;
    const auto traj = integrate(zero, flat, 0.0, xs, 1.0, opts);
    EXPECT_EQ(traj.status, TrajectoryStatus::NodeAbort);
    EXPECT_STREQ(to_string(traj.status), to_string(TrajectoryStatus::NodeAbort));
}

TEST(Integrator, WindowExitStops)
{
    const auto psi = MultiTimeWave::product({SingleParticleWave(1.0, {{3.0, EnergySign::Positive, {1.0, 0.0}}})});
    IntegratorOptions opts;
    opts.windows = {{-1.0, 1.0}};
    const std::vector<double> xs{0.0};
    const auto traj = integrate(psi, flat_foliation(), 0.0, xs, 5.0, opts);
    EXPECT_EQ(traj.status, TrajectoryStatus::WindowExit);
    EXPECT_LT(traj.stop_t, 5.0);
    // The step that leaves the window is the last one kept.
    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) EXPECT_LE(traj.samples[i].points[0].x1, 1.0);
    EXPECT_GT(traj.samples.back().points[0].x1, 1.0);
}

TEST(Integrator, FixedStepFourthOrder)
{
    const auto psi = entangled_packets(true);
    const auto spec = appendix_foliation();
    const std::vector<double> xs{0.3, 3.2};
    auto end = [&](double h) {
        IntegratorOptions opts;
        opts.h = h;
        opts.tol = std::numeric_limits<double>::infinity();
        const auto traj = integrate(psi, spec, 2.0, xs, 3.0, opts);
        return traj.samples.back().points[1].x1;
    };
    const double ref = end(0.0025);
    const double e1 = std::abs(end(0.1) - ref), e2 = std::abs(end(0.05) - ref);
    EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.5);
}

TEST(Plateau, FrozenBitIdentically)
{
    const auto psi = entangled_packets(true);
    const auto spec = appendix_foliation();
    const std::vector<double> xs{-4.0, 3.0};
    const auto traj = integrate(psi, spec, -2.0, xs, 2.0);
    ASSERT_EQ(traj.status, TrajectoryStatus::Completed);
    const Event* frozen = nullptr;
    int on = 0;
    for (const auto& s : traj.samples) {
        if (!s.on_plateau[0]) continue;
        ++on;
        if (!frozen) frozen = &s.points[0];
        EXPECT_EQ(s.points[0].x1, frozen->x1);
        // f vanishes identically on the plateau; just outside it f_t is below eps_deg.
        if (std::abs(s.t) <= kA) {
            EXPECT_EQ(s.points[0].x0, 0.0);
        } else {
            EXPECT_LT(std::abs(s.points[0].x0), 1e-12);
        }
        EXPECT_EQ(s.v_after[0][1], 0.0);
    }
    EXPECT_GT(on, 2);
    int crossings0 = 0;
    for (const auto& c : plateau_crossings(traj)) crossings0 += c.particle == 0 ? 1 : 0;
    EXPECT_EQ(crossings0, 1);
}

TEST(Plateau, KinksOnlyWhenEntangled)
{
    const auto spec = appendix_foliation();
    const std::vector<double> xs{-4.5, 3.0};
    const auto ent = integrate(entangled_packets(true), spec, -2.0, xs, 2.0);
    const auto prod = integrate(entangled_packets(false), spec, -2.0, xs, 2.0);
    const auto kinks = detect_kinks(ent, 1e-3);
    ASSERT_EQ(kinks.size(), 1u);
    EXPECT_EQ(kinks[0].particle, 0);
    // The frozen stretch covers the plateau and the thin band where f_t underflows eps_deg.
    EXPECT_LE(kinks[0].t_enter, -kA);
    EXPECT_GT(kinks[0].t_enter, -kA - 0.1);
    EXPECT_GE(kinks[0].t_exit, kA);
    EXPECT_LT(kinks[0].t_exit, kA + 0.1);
    EXPECT_TRUE(detect_kinks(prod, 1e-6).empty());
    EXPECT_FALSE(plateau_crossings(prod).empty());
}

TEST(Causal, DetectsFabricatedViolations)
{
    const auto ok = fabricated({{0.0, 0.0}, {1.0, 0.5}, {2.0, 1.5}});
    EXPECT_EQ(causal_character(ok, true).violations, 0);
    EXPECT_EQ(causal_character(ok, true).pairs_checked, 2);
    const auto spacelike = fabricated({{0.0, 0.0}, {1.0, 1.2}});
    EXPECT_EQ(causal_character(spacelike, false).violations, 1);
    const auto backward = fabricated({{0.0, 0.0}, {-1.0, 0.2}});
    EXPECT_EQ(causal_character(backward, false).violations, 0);
    EXPECT_EQ(causal_character(backward, true).violations, 1);
    // Exactly null is allowed.
    EXPECT_EQ(causal_character(fabricated({{0.0, 0.0}, {0.5, -0.5}}), true).violations, 0);
}

TEST(Causal, IntegratedTrajectoriesAreTimelike)
{
    const auto psi = entangled_packets(true);
    for (const auto& spec : {appendix_foliation(), appendix_f2_foliation()}) {
        const std::vector<double> xs{-4.8, 2.5};
        const auto traj = integrate(psi, spec, -2.0, xs, 2.0);
        EXPECT_EQ(causal_character(traj, true).violations, 0) << spec.name;
    }
    const std::vector<double> xs{-4.8, 2.5};
    const auto back = integrate(psi, backward_example(), -0.9, xs, 0.9);
    EXPECT_EQ(causal_character(back, false).violations, 0);
}

TEST(Containment, CountsPointsOutsideRegion)
{
    std::vector<Trajectory> trajs{fabricated({{0.0, -3.0}, {0.0, -3.0}, {0.0, -1.0}})};
    const auto r = region_containment_check(trajs, {-1e300, -kA}, {0.0, 2.0});
    // One particle, which starts inside and leaves at t = 2.
    EXPECT_EQ(r.checked, 1);
    EXPECT_EQ(r.violations, 1);
    EXPECT_EQ(region_containment_check(trajs, {-1e300, -kA}, {0.0, 1.0}).violations, 0);
}

TEST(CurrentForm, AntisymmetricWithExpectedSigns)
{
    const auto psi = entangled_packets(true);
    const auto spec = appendix_foliation();
    const std::vector<double> xs{-2.0, 3.5};
    const auto config = on_leaf(spec, 0.7, xs);
    const auto form = current_form_J(psi, config);
    const auto j = current_tensor(psi(config.points), 2);
    ASSERT_EQ(form.components.size(), 4u);
    // J_{k1 k2} = eps_{k1 n1} eps_{k2 n2} j^{n1 n2}, with eps_01 = 1, eps_10 = -1.
    EXPECT_DOUBLE_EQ(form.components[0], j[3]);
    EXPECT_DOUBLE_EQ(form.components[1], -j[2]);
    EXPECT_DOUBLE_EQ(form.components[2], -j[1]);
    EXPECT_DOUBLE_EQ(form.components[3], j[0]);
    const Eigen::Matrix4d m = current_form_matrix(form);
    EXPECT_TRUE((m + m.transpose()).isZero(0.0));
}

TEST(CurrentForm, KernelContainsVelocity)
{
    Rng rng(9);
    const auto psi = entangled_packets(true);
    for (const auto& spec : {flat_foliation(), appendix_foliation(), appendix_f2_foliation()}) {
        for (int i = 0; i < 50; ++i) {
            const double t = rng.uniform(-2.0, 2.0);
            const std::vector<double> xs{rng.uniform(-8.0, -2.0), rng.uniform(0.0, 6.0)};
            const auto config = on_leaf(spec, t, xs);
            const auto v = config_velocity(psi, spec, config);
            if (std::abs(v[0][1]) + std::abs(v[1][1]) == 0.0) continue;
            EXPECT_LT(kernel_check(psi, spec, t, config, v), 1e-10) << spec.name << " t=" << t;
            std::vector<Vector2> wrong = v;
            wrong[1][1] += 0.3;
            EXPECT_GT(kernel_check(psi, spec, t, config, wrong), 1e-3);
        }
    }
}

TEST(CurrentForm, VanishingFormRaises)
{
    const auto zero = MultiTimeWave::product({SingleParticleWave(1.0, {{0.5, EnergySign::Positive, {0.0, 0.0}}}),
                                              SingleParticleWave(1.0, {{0.5, EnergySign::Positive, {0.0, 0.0}}})});
    const auto flat = flat_foliation();
    const std::vector<double> xs{0.0, 1.0};
    const std::vector<Vector2> v{{1.0, 0.0}, {1.0, 0.0}};
    EXPECT_THROW(kernel_check(zero, flat, 0.0, on_leaf(flat, 0.0, xs), v), RankError);
}

TEST(Configuration, OnLeafResidual)
{
    const auto spec = appendix_foliation();
    const std::vector<double> xs{-1.0, 0.5, 2.0};
    auto c = on_leaf(spec, 0.4, xs);
    EXPECT_EQ(c.size(), 3);
    EXPECT_EQ(c.max_on_leaf_residual(spec), 0.0);
    c.points[1].x0 += 1e-3;
    EXPECT_NEAR(c.max_on_leaf_residual(spec), 1e-3, 1e-12);
}

} // namespace
} // namespace hbd
