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

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hbd/dirac.hpp"
#include "hbd/foliation.hpp"

namespace hbd {

// N events on the leaf with parameter t.
struct Configuration {
    double t = 0.0;
    std::vector<Event> points;

    int size() const { return static_cast<int>(points.size()); }
    double max_on_leaf_residual(const FoliationSpec& spec) const;
};

Configuration on_leaf(const FoliationSpec& spec, double t, std::span<const double> xs);

struct VelocityOptions {
    double eps_node = 1e-10;
    double reference_scale = 0.0;  // |m.j| reference for node detection; 0 disables the relative test
    double velocity_scale = 1.0;   // != 1 only for negative controls
};

// All normal contractions use m = (1, -f_x); the positive factors prod sqrt(h_j) cancel in
// the velocity.
Vector2 slot_current(const MultiTimeWave& psi, const FoliationSpec& spec, const Configuration& config,
                     int k);

// dX_k/dt = f_t j_k / (m . j_k), exactly zero where the leaf is degenerate at X_k.
// Throws NodeError if |m . j_k| <= eps_node * reference_scale at a moving particle.
std::vector<Vector2> config_velocity(const MultiTimeWave& psi, const FoliationSpec& spec,
                                     const Configuration& config, const VelocityOptions& opts = {});

struct IntegratorOptions {
    double h = 0.05;
    double tol = 1e-8;           // Richardson local error; infinity gives fixed steps
    double rtol = 1e-3;          // local error relative to the particle's leaf displacement
    double eps_node = 1e-10;
    double node_reference = 0.0; // <= 0: use |m.j| at the initial configuration
    double velocity_scale = 1.0;
    std::vector<Interval> windows;  // per particle; empty uses the foliation window
    double event_tol = 1e-10;       // plateau entry/exit location
    int max_halvings = 40;
    double theta_kink = 1e-6;
};

struct TrajectorySample {
    double t = 0.0;
    std::vector<Event> points;
    std::vector<Vector2> v_before;  // left limit of the velocity
    std::vector<Vector2> v_after;   // right limit of the velocity
    std::vector<unsigned char> on_plateau;
};

enum class TrajectoryStatus { Completed, NodeAbort, WindowExit };

struct KinkEvent {
    int particle = 0;
    double t_enter = 0.0;
    double t_exit = 0.0;
    Vector2 dir_in{};
    Vector2 dir_out{};
    double angle = 0.0;          // between the lines spanned by dir_in and dir_out
    bool near_lightlike = false;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<KinkEvent> kinks;
    TrajectoryStatus status = TrajectoryStatus::Completed;
    double stop_t = 0.0;
    std::string message;
    int steps = 0;
    int rejected_steps = 0;
};

const char* to_string(TrajectoryStatus status);

// RK4 on the reduced coordinates X_k^1(t) with X_k^0 = f(t, X_k^1). Steps never straddle
// t-breakpoints, plateau interval ends, or located entry/exit times of a particle into
// a degenerate region.
Trajectory integrate(const MultiTimeWave& psi, const FoliationSpec& spec, double t0,
                     std::span<const double> x0, double t1, const IntegratorOptions& opts = {});
Trajectory integrate(const MultiTimeWave& psi, const FoliationSpec& spec, const Configuration& config0,
                     double t1, const IntegratorOptions& opts = {});

// Every passage through a frozen stretch, with its one-sided direction limits.
std::vector<KinkEvent> plateau_crossings(const Trajectory& traj);
// Crossings whose direction change exceeds theta.
std::vector<KinkEvent> detect_kinks(const Trajectory& traj, double theta = 1e-6);

struct CausalReport {
    int pairs_checked = 0;
    int violations = 0;
    int backward_steps = 0;  // counted as violations only for monotone foliations
    double worst_t = 0.0;
};

// Chords between consecutive samples must satisfy (dX0)^2 - (dX1)^2 >= -1e-12 (dX0)^2, up
// to the floating-point resolution of the stored coordinates.
CausalReport causal_character(const Trajectory& traj, bool monotone);

struct ContainmentReport {
    int checked = 0;
    int violations = 0;
};

ContainmentReport region_containment_check(std::span<const Trajectory> trajs, Interval region,
                                           Interval t_interval);

// J_{k_1..k_N} = eps_{k_1 n_1} ... eps_{k_N n_N} j^{n_1..n_N}, eps_01 = +1.
struct CurrentForm {
    int n = 0;
    std::vector<double> components;  // same index order as CurrentTensor
};

CurrentForm current_form_J(const MultiTimeWave& psi, const Configuration& config);
CurrentForm current_form_J(const CurrentTensor& j);

// For N = 2: the 2-form as an antisymmetric matrix on (x0_1, x1_1, x0_2, x1_2).
Eigen::Matrix4d current_form_matrix(const CurrentForm& form);

// Sine of the angle between the kernel of J pulled back to the chart
// (t, y1, y2) -> (f(t,y1), y1, f(t,y2), y2) and the tangent (1, v1^1, v2^1). N = 2 only.
double kernel_check(const MultiTimeWave& psi, const FoliationSpec& spec, double t,
                    const Configuration& config, std::span<const Vector2> velocities);

} // namespace hbd
