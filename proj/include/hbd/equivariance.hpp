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

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hbd/dirac.hpp"
#include "hbd/dynamics.hpp"
#include "hbd/foliation.hpp"
#include "hbd/quadrature.hpp"

namespace hbd {

struct Normalization {
    double z = 0.0;
    double error_estimate = 0.0;  // relative change of Z when the quadrature order is doubled
    bool warning = false;         // error_estimate above 1e-6
};

// Joint density of N particles on the leaf t with respect to coordinate volume
// dx_1 ... dx_N, restricted to a box of per-particle windows.
//
// The state is a sum of products, so every window integral factorises into
// per-slot overlap matrices G_ab = int phi_a^dagger (I - f_x sigma_x) phi_b dx; Z and
// the marginals are assembled from these without an N-dimensional grid.
class LeafDensity {
public:
    LeafDensity(const MultiTimeWave& psi, const FoliationSpec& spec, double t, std::vector<Interval> windows,
                int quad_order = 8, double rel_tol = 1e-10);

    double t() const { return t_; }
    int n() const { return n_; }
    const std::vector<Interval>& windows() const { return windows_; }
    const MultiTimeWave& psi() const { return psi_; }
    const FoliationSpec& spec() const { return spec_; }

    const Normalization& normalization() const { return norm_; }
    double z() const { return norm_.z; }

    // Contraction of the current tensor with m = (1, -f_x) in every slot.
    double unnormalized(std::span<const double> xs) const;
    double density(std::span<const double> xs) const { return unnormalized(xs) / norm_.z; }

    // Normalised marginal density and CDF of one particle over its window.
    double marginal_density(int slot, double x) const;
    double marginal_cdf(int slot, double x) const;

    // Window integral of D over all slots except `slot`, at x in that slot (unnormalised).
    double partial_integral(int slot, double x) const;

    // Per-slot overlap matrices (terms x terms).
    const std::vector<Eigen::MatrixXcd>& overlaps() const { return overlaps_; }
    // Quadrature nodes used for slot j.
    const NodeSet& rule(int slot) const { return rules_[static_cast<std::size_t>(slot)]; }

private:
    Eigen::MatrixXcd pointwise(int slot, double x) const;
    std::vector<Eigen::MatrixXcd> overlaps_for(int order) const;
    double assemble(const std::vector<Eigen::MatrixXcd>& g) const;
    void build_cdf(int slot) const;

    const MultiTimeWave& psi_;
    const FoliationSpec& spec_;
    double t_;
    int n_;
    std::vector<Interval> windows_;
    int order_;
    std::vector<NodeSet> rules_;
    std::vector<Eigen::MatrixXcd> overlaps_;
    Eigen::VectorXcd coeffs_;
    Normalization norm_;

    struct CdfTable {
        std::vector<double> edges;
        std::vector<double> cumulative;
    };
    mutable std::vector<CdfTable> cdf_;
    mutable std::unique_ptr<std::mutex> cdf_mutex_ = std::make_unique<std::mutex>();
};

Normalization normalize(const MultiTimeWave& psi, const FoliationSpec& spec, double t,
                        const std::vector<Interval>& windows, int quad_order = 8);

struct SampleResult {
    std::vector<Configuration> configs;
    std::uint64_t proposals = 0;
    int restarts = 0;
    double envelope = 0.0;

    double acceptance() const { return proposals ? static_cast<double>(configs.size()) / proposals : 0.0; }
};

// Rejection sampling with a uniform proposal over the window box. The envelope is
// 1.2 x the maximum of D on a grid (512 per axis for N <= 2); a proposal above the
// envelope restarts the whole run with a raised envelope. Throws EnvelopeError after
// three restarts.
SampleResult sample(const LeafDensity& ld, std::size_t m, std::uint64_t seed);

struct TransportOptions {
    IntegratorOptions integrator;
    int threads = 1;
    // Region checked for containment over region_t (empty region disables).
    Interval region{0.0, -1.0};
    Interval region_t;
    // Times at which positions are looked up exactly in each trajectory.
    std::vector<double> probe_times;
};

struct TransportResult {
    std::vector<Configuration> final;         // completed trajectories only, input order
    std::vector<TrajectoryStatus> status;     // per input sample
    std::vector<std::vector<double>> probes;  // per sample, index p * N + k, NaN if absent
    std::vector<int> kink_counts;             // per sample
    std::vector<double> max_kink_angle;       // per sample, 0 if none
    int node_aborts = 0;
    int window_exits = 0;
    int causal_violations = 0;
    int containment_checked = 0;
    int containment_violations = 0;
    double node_reference = 0.0;
};

// Integrates every configuration from t0 to t1. Results are reduced in input order,
// so they do not depend on the thread count.
TransportResult transport(std::span<const Configuration> samples, const MultiTimeWave& psi,
                          const FoliationSpec& spec, double t0, double t1, const TransportOptions& opts);

struct Comparison {
    std::vector<double> ks;
    double ks_critical = 0.0;
    double energy = 0.0;
};

// Per-particle one-sample KS against the marginal CDFs of target; energy distance
// against a fresh sample from target drawn with reference_seed.
Comparison compare(std::span<const Configuration> ensemble, const LeafDensity& target,
                   std::uint64_t reference_seed);

// sup over probes and pairs of times of |m_t(x) - m_t'(x)| / max m, where m_t is the
// window integral of D over the other particles. Requires every probe to be degenerate
// for every t in t_list.
double no_signaling_marginal(const MultiTimeWave& psi, const FoliationSpec& spec, Interval a,
                             std::span<const double> t_list, std::span<const double> probes,
                             const std::vector<Interval>& windows, int slot = 0);

struct ProbabilityScan {
    std::vector<double> t;
    std::vector<double> z;
    double max_drift = 0.0;  // max |Z(t)/Z(t_0) - 1|
};

ProbabilityScan total_probability_scan(const MultiTimeWave& psi, const FoliationSpec& spec,
                                       std::span<const double> t_grid, const std::vector<Interval>& windows);

struct EnsembleReport {
    std::size_t m = 0;
    std::vector<double> ks_per_marginal;
    double ks_threshold = 0.0;
    double ks_critical = 0.0;
    double energy_distance = 0.0;
    double total_prob_drift = 0.0;
    int node_aborts = 0;
    int window_exits = 0;
    int causal_violations = 0;
    int containment_violations = 0;
    double acceptance = 0.0;
    double wall_time = 0.0;  // not serialised, so reports of equal runs are identical

    std::string key_value() const;
    std::string csv_header() const;
    std::string csv_row() const;
};

// KS gate 0.023 sqrt(5000/M) + 0.007, i.e. the alpha = 0.01 critical value plus a
// transport allowance; 0.03 at M = 5000.
double ks_gate(std::size_t m);

struct GateOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<GateOutcome> evaluate_gates(const EnsembleReport& report);

struct EnsembleSetup {
    std::vector<Interval> windows;  // sampling, target and normalisation box
    std::size_t m = 5000;
    std::uint64_t seed = 1;
    double t0 = -2.0;
    double t1 = 2.0;
    int z_points = 41;
    TransportOptions transport;
};

struct EnsembleRun {
    EnsembleReport report;
    SampleResult initial;
    TransportResult transported;
    Comparison comparison;
    ProbabilityScan scan;
    std::vector<GateOutcome> gates;
    bool pass = false;
};

// Sample on t0, transport to t1, compare with the density on t1 and scan Z over [t0, t1].
EnsembleRun run_ensemble(const MultiTimeWave& psi, const FoliationSpec& spec, const EnsembleSetup& setup);

} // namespace hbd
