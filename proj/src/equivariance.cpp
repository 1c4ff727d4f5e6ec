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

#include "hbd/equivariance.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "hbd/error.hpp"
#include "hbd/rng.hpp"
#include "hbd/stats.hpp"

namespace hbd {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

LeafDensity::LeafDensity(const MultiTimeWave& psi, const FoliationSpec& spec, double t,
                         std::vector<Interval> windows, int quad_order, double rel_tol)
    : psi_(psi), spec_(spec), t_(t), n_(psi.n_particles()), windows_(std::move(windows)), order_(quad_order)
{
    if (static_cast<int>(windows_.size()) != n_)
        throw ArityMismatch("LeafDensity: one window per particle required");
    for (const auto& w : windows_)
        if (!std::isfinite(w.lo) || !std::isfinite(w.hi) || !(w.hi > w.lo))
            throw BadQuadrature("LeafDensity: windows must be finite and non-empty");
    if (quad_order < 2) throw BadQuadrature("LeafDensity: quadrature order must be at least 2");

    const auto& terms = psi_.terms();
    const auto nt = static_cast<Eigen::Index>(terms.size());
    coeffs_.resize(nt);
    for (Eigen::Index a = 0; a < nt; ++a) coeffs_(a) = terms[static_cast<std::size_t>(a)].coeff;

    std::vector<double> forced;
    for (const auto& plateau : spec_.plateaus)
        for (const auto& xi : plateau.x_intervals)
            for (double e : {xi.lo, xi.hi})
                if (std::isfinite(e)) forced.push_back(e);

    for (int j = 0; j < n_; ++j) {
        // Fixed irrational mix of real and imaginary parts, so that cross terms are
        // resolved even when the diagonal terms are smooth.
        auto probe = [&, j](double x) {
            const Eigen::MatrixXcd b = pointwise(j, x);
            double s = 0.0;
            for (Eigen::Index r = 0; r < b.rows(); ++r)
                for (Eigen::Index c = 0; c < b.cols(); ++c) s += b(r, c).real() + 0.6180339887 * b(r, c).imag();
            return s;
        };
        const NodeSet adaptive = adaptive_rule(probe, windows_[j], order_, rel_tol, 32, 10, forced);
        rules_.push_back(adaptive);
    }

    overlaps_ = overlaps_for(order_);
    norm_.z = assemble(overlaps_);
    const double z2 = assemble(overlaps_for(2 * order_));
    if (!(norm_.z > 0.0) || !(z2 > 0.0))
        throw BadQuadrature("LeafDensity: non-positive normalisation (state vanishes on the window)");
    norm_.error_estimate = std::abs(z2 - norm_.z) / z2;
    norm_.warning = norm_.error_estimate > 1e-6;
    cdf_.resize(static_cast<std::size_t>(n_));
}

Eigen::MatrixXcd LeafDensity::pointwise(int slot, double x) const
{
    const auto& terms = psi_.terms();
    const auto nt = static_cast<Eigen::Index>(terms.size());
    const Event e = spec_.event(t_, x);
    const double fx = spec_.f_x(t_, x);
    std::vector<Spinor> phi(terms.size());
    std::vector<Spinor> mphi(terms.size());
    for (std::size_t a = 0; a < terms.size(); ++a) {
        phi[a] = terms[a].factors[static_cast<std::size_t>(slot)](e);
        mphi[a] = Spinor(phi[a](0) - fx * phi[a](1), phi[a](1) - fx * phi[a](0));
    }
    Eigen::MatrixXcd b(nt, nt);
    for (Eigen::Index a = 0; a < nt; ++a)
        for (Eigen::Index c = 0; c < nt; ++c)
            b(a, c) = phi[static_cast<std::size_t>(a)].dot(mphi[static_cast<std::size_t>(c)]);
    return b;
}

std::vector<Eigen::MatrixXcd> LeafDensity::overlaps_for(int order) const
{
    std::vector<Eigen::MatrixXcd> g;
    const auto nt = static_cast<Eigen::Index>(psi_.terms().size());
    for (int j = 0; j < n_; ++j) {
        const NodeSet rule = composite_rule(rules_[static_cast<std::size_t>(j)].edges, order);
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(nt, nt);
        for (std::size_t i = 0; i < rule.x.size(); ++i) acc += rule.w[i] * pointwise(j, rule.x[i]);
        g.push_back(acc);
    }
    return g;
}

double LeafDensity::assemble(const std::vector<Eigen::MatrixXcd>& g) const
{
    Complex sum = 0.0;
    for (Eigen::Index a = 0; a < coeffs_.size(); ++a)
        for (Eigen::Index b = 0; b < coeffs_.size(); ++b) {
            Complex prod = std::conj(coeffs_(a)) * coeffs_(b);
            for (const auto& m : g) prod *= m(a, b);
            sum += prod;
        }
    return sum.real();
}

double LeafDensity::unnormalized(std::span<const double> xs) const
{
    if (static_cast<int>(xs.size()) != n_) throw ArityMismatch("LeafDensity: wrong number of coordinates");
    std::vector<Event> events;
    std::vector<Covector> covectors;
    for (double x : xs) {
        events.push_back(spec_.event(t_, x));
        covectors.push_back(scaled_normal(spec_, t_, x));
    }
    return full_contraction(psi_(events), n_, covectors);
}

double LeafDensity::partial_integral(int slot, double x) const
{
    if (slot < 0 || slot >= n_) throw std::out_of_range("LeafDensity: slot out of range");
    const Eigen::MatrixXcd b = pointwise(slot, x);
    Complex sum = 0.0;
    for (Eigen::Index a = 0; a < coeffs_.size(); ++a)
        for (Eigen::Index c = 0; c < coeffs_.size(); ++c) {
            Complex prod = std::conj(coeffs_(a)) * coeffs_(c) * b(a, c);
            for (int j = 0; j < n_; ++j)
                if (j != slot) prod *= overlaps_[static_cast<std::size_t>(j)](a, c);
            sum += prod;
        }
    return sum.real();
}

double LeafDensity::marginal_density(int slot, double x) const
{
    if (!windows_[static_cast<std::size_t>(slot)].contains(x)) return 0.0;
    return partial_integral(slot, x) / norm_.z;
}

void LeafDensity::build_cdf(int slot) const
{
    auto& table = cdf_[static_cast<std::size_t>(slot)];
    if (!table.edges.empty()) return;
    const Interval w = windows_[static_cast<std::size_t>(slot)];
    const int panels = std::clamp(static_cast<int>(std::ceil(w.width() / 0.02)), 256, 8192);
    const auto rule = gauss_legendre(6);
    table.edges.resize(static_cast<std::size_t>(panels + 1));
    table.cumulative.assign(static_cast<std::size_t>(panels + 1), 0.0);
    for (int p = 0; p <= panels; ++p) table.edges[p] = w.lo + w.width() * p / panels;
    table.edges.back() = w.hi;
    for (int p = 0; p < panels; ++p) {
        const double mid = 0.5 * (table.edges[p] + table.edges[p + 1]);
        const double half = 0.5 * (table.edges[p + 1] - table.edges[p]);
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            s += half * rule.weights[i] * partial_integral(slot, mid + half * rule.nodes[i]);
        table.cumulative[p + 1] = table.cumulative[p] + s;
    }
}

double LeafDensity::marginal_cdf(int slot, double x) const
{
    if (slot < 0 || slot >= n_) throw std::out_of_range("LeafDensity: slot out of range");
    const Interval w = windows_[static_cast<std::size_t>(slot)];
    if (x <= w.lo) return 0.0;
    if (x >= w.hi) return 1.0;
    {
        std::lock_guard lock(*cdf_mutex_);
        build_cdf(slot);
    }
    const auto& table = cdf_[static_cast<std::size_t>(slot)];
    const std::size_t panels = table.edges.size() - 1;
    auto p = static_cast<std::size_t>((x - w.lo) / w.width() * static_cast<double>(panels));
    p = std::min(p, panels - 1);
    while (p > 0 && table.edges[p] > x) --p;
    while (p + 1 < panels && table.edges[p + 1] <= x) ++p;
    const auto rule = gauss_legendre(6);
    const double a = table.edges[p];
    const double mid = 0.5 * (a + x), half = 0.5 * (x - a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        s += half * rule.weights[i] * partial_integral(slot, mid + half * rule.nodes[i]);
    return std::clamp((table.cumulative[p] + s) / table.cumulative.back(), 0.0, 1.0);
}

Normalization normalize(const MultiTimeWave& psi, const FoliationSpec& spec, double t,
                        const std::vector<Interval>& windows, int quad_order)
{
    return LeafDensity(psi, spec, t, windows, quad_order).normalization();
}

namespace {

// Maximum of D on a regular grid, assembled from per-slot pointwise overlap matrices.
double grid_supremum(const LeafDensity& ld)
{
    const int n = ld.n();
    const int per_axis = n <= 2 ? 512 : std::max(8, static_cast<int>(std::pow(2.0e6, 1.0 / n)));
    const auto& terms = ld.psi().terms();
    const std::size_t nt = terms.size();
    Eigen::VectorXcd c(static_cast<Eigen::Index>(nt));
    for (std::size_t a = 0; a < nt; ++a) c(static_cast<Eigen::Index>(a)) = terms[a].coeff;

    // b[j][i] holds the nt x nt pointwise matrix of slot j at grid point i.
    std::vector<std::vector<Eigen::MatrixXcd>> b(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const Interval w = ld.windows()[static_cast<std::size_t>(j)];
        for (int i = 0; i < per_axis; ++i) {
            const double x = w.lo + w.width() * i / (per_axis - 1);
            const Event e = ld.spec().event(ld.t(), x);
            const double fx = ld.spec().f_x(ld.t(), x);
            Eigen::MatrixXcd m(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(nt));
            std::vector<Spinor> phi(nt), mphi(nt);
            for (std::size_t a = 0; a < nt; ++a) {
                phi[a] = terms[a].factors[static_cast<std::size_t>(j)](e);
                mphi[a] = Spinor(phi[a](0) - fx * phi[a](1), phi[a](1) - fx * phi[a](0));
            }
            for (std::size_t a = 0; a < nt; ++a)
                for (std::size_t d = 0; d < nt; ++d)
                    m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(d)) = phi[a].dot(mphi[d]);
            b[static_cast<std::size_t>(j)].push_back(std::move(m));
        }
    }
    const Eigen::MatrixXcd weights = c.conjugate() * c.transpose();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    double best = 0.0;
    while (true) {
        Eigen::MatrixXcd prod = weights;
        for (int j = 0; j < n; ++j)
            prod = prod.cwiseProduct(b[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[j])]);
        best = std::max(best, prod.sum().real());
        int j = n - 1;
        while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == per_axis) idx[static_cast<std::size_t>(j--)] = 0;
        if (j < 0) break;
    }
    return best;
}

} // namespace

SampleResult sample(const LeafDensity& ld, std::size_t m, std::uint64_t seed)
{
    SampleResult result;
    if (m == 0) return result;
    const int n = ld.n();
    double envelope = 1.2 * grid_supremum(ld);
    if (!(envelope > 0.0)) throw EnvelopeError("sample: density vanishes on the grid");
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int attempt = 0;; ++attempt) {
        Rng rng(seed);
        result.configs.clear();
        result.configs.reserve(m);
        result.envelope = envelope;
        bool restart = false;
        while (result.configs.size() < m) {
            for (int j = 0; j < n; ++j) {
                const Interval w = ld.windows()[static_cast<std::size_t>(j)];
                xs[static_cast<std::size_t>(j)] = rng.uniform(w.lo, w.hi);
            }
            const double u = rng.uniform();
            ++result.proposals;
            const double d = ld.unnormalized(xs);
            if (d > envelope) {
                if (attempt >= 3) throw EnvelopeError("sample: envelope exceeded after 3 restarts");
                envelope = 1.2 * std::max(envelope, d);
                ++result.restarts;
                restart = true;
                break;
            }
            if (u * envelope < d) result.configs.push_back(on_leaf(ld.spec(), ld.t(), xs));
        }
        if (!restart) return result;
    }
}

TransportResult transport(std::span<const Configuration> samples, const MultiTimeWave& psi,
                          const FoliationSpec& spec, double t0, double t1, const TransportOptions& opts)
{
    TransportResult result;
    const std::size_t m = samples.size();
    if (m == 0) return result;
    const int n = psi.n_particles();

    IntegratorOptions iopts = opts.integrator;
    if (iopts.node_reference <= 0.0) {
        std::vector<double> d;
        d.reserve(m);
        for (const auto& c : samples) {
            std::vector<Covector> covectors;
            for (const auto& p : c.points) covectors.push_back(scaled_normal(spec, t0, p.x1));
            d.push_back(full_contraction(psi(c.points), n, covectors));
        }
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(m / 2), d.end());
        iopts.node_reference = d[m / 2];
    }
    result.node_reference = iopts.node_reference;

    struct Outcome {
        TrajectoryStatus status = TrajectoryStatus::Completed;
        Configuration final;
        std::vector<double> probes;
        int causal = 0;
        int contained_checked = 0;
        int contained_bad = 0;
        int kinks = 0;
        double max_angle = 0.0;
    };
    std::vector<Outcome> outcomes(m);
    const bool check_region = opts.region.lo <= opts.region.hi;

    auto run = [&](std::size_t i) {
        std::vector<double> x0;
        for (const auto& p : samples[i].points) x0.push_back(p.x1);
        const Trajectory traj = integrate(psi, spec, t0, x0, t1, iopts);
        Outcome& out = outcomes[i];
        out.status = traj.status;
        out.causal = causal_character(traj, spec.monotone).violations;
        if (check_region) {
            const auto report = region_containment_check(std::span(&traj, 1), opts.region, opts.region_t);
            out.contained_checked = report.checked;
            out.contained_bad = report.violations;
        }
        out.kinks = static_cast<int>(traj.kinks.size());
        for (const auto& k : traj.kinks) out.max_angle = std::max(out.max_angle, k.angle);
        out.probes.assign(opts.probe_times.size() * static_cast<std::size_t>(n), kNan);
        for (std::size_t p = 0; p < opts.probe_times.size(); ++p) {
            const double tau = opts.probe_times[p];
            for (const auto& s : traj.samples)
                if (s.t == tau) {
                    for (int k = 0; k < n; ++k) out.probes[p * n + k] = s.points[static_cast<std::size_t>(k)].x1;
                    break;
                }
        }
        if (traj.status == TrajectoryStatus::Completed) {
            out.final.t = traj.samples.back().t;
            out.final.points = traj.samples.back().points;
        }
    };

    const int threads = std::max(1, opts.threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < m; ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                try {
                    for (std::size_t i = next++; i < m; i = next++) run(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    for (auto& out : outcomes) {
        result.status.push_back(out.status);
        result.probes.push_back(std::move(out.probes));
        result.kink_counts.push_back(out.kinks);
        result.max_kink_angle.push_back(out.max_angle);
        result.causal_violations += out.causal;
        result.containment_checked += out.contained_checked;
        result.containment_violations += out.contained_bad;
        if (out.status == TrajectoryStatus::NodeAbort) ++result.node_aborts;
        else if (out.status == TrajectoryStatus::WindowExit) ++result.window_exits;
        else result.final.push_back(std::move(out.final));
    }
    return result;
}

Comparison compare(std::span<const Configuration> ensemble, const LeafDensity& target, std::uint64_t reference_seed)
{
    Comparison result;
    const int n = target.n();
    if (ensemble.empty()) {
        result.ks.assign(static_cast<std::size_t>(n), 1.0);
        return result;
    }
    result.ks_critical = ks_critical_value(ensemble.size());
    for (int k = 0; k < n; ++k) {
        std::vector<double> xs;
        xs.reserve(ensemble.size());
        for (const auto& c : ensemble) xs.push_back(c.points[static_cast<std::size_t>(k)].x1);
        result.ks.push_back(ks_statistic(xs, [&](double x) { return target.marginal_cdf(k, x); }));
    }
    const auto fresh = sample(target, ensemble.size(), reference_seed);
    std::vector<std::vector<double>> a, b;
    for (const auto& c : ensemble) {
        std::vector<double> row;
        for (const auto& p : c.points) row.push_back(p.x1);
        a.push_back(std::move(row));
    }
    for (const auto& c : fresh.configs) {
        std::vector<double> row;
        for (const auto& p : c.points) row.push_back(p.x1);
        b.push_back(std::move(row));
    }
    result.energy = energy_distance(a, b);
    return result;
}

double no_signaling_marginal(const MultiTimeWave& psi, const FoliationSpec& spec, Interval a,
                             std::span<const double> t_list, std::span<const double> probes,
                             const std::vector<Interval>& windows, int slot)
{
    if (t_list.size() < 2 || probes.empty())
        throw std::invalid_argument("no_signaling_marginal: need two times and at least one probe");
    for (double t : t_list) {
        for (double e : {a.lo, a.hi})
            if (std::isfinite(e) && !degeneracy_at(spec, t, e))
                throw PreconditionError("no_signaling_marginal: region is not degenerate at t = " + fmt(t));
        for (double x : probes) {
            if (!a.contains(x)) throw PreconditionError("no_signaling_marginal: probe outside the region");
            if (!degeneracy_at(spec, t, x))
                throw PreconditionError("no_signaling_marginal: probe is not degenerate at t = " + fmt(t));
        }
    }
    std::vector<std::vector<double>> m;
    double scale = 0.0;
    for (double t : t_list) {
        const LeafDensity ld(psi, spec, t, windows);
        std::vector<double> row;
        for (double x : probes) {
            row.push_back(ld.partial_integral(slot, x));
            scale = std::max(scale, std::abs(row.back()));
        }
        m.push_back(std::move(row));
    }
    if (!(scale > 0.0)) throw PreconditionError("no_signaling_marginal: marginal vanishes at every probe");
    double worst = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j)
            for (std::size_t p = 0; p < probes.size(); ++p) worst = std::max(worst, std::abs(m[i][p] - m[j][p]));
    return worst / scale;
}

ProbabilityScan total_probability_scan(const MultiTimeWave& psi, const FoliationSpec& spec,
                                       std::span<const double> t_grid, const std::vector<Interval>& windows)
{
    ProbabilityScan scan;
    for (double t : t_grid) {
        scan.t.push_back(t);
        scan.z.push_back(normalize(psi, spec, t, windows).z);
        scan.max_drift = std::max(scan.max_drift, std::abs(scan.z.back() / scan.z.front() - 1.0));
    }
    return scan;
}

double ks_gate(std::size_t m)
{
    if (m == 0) return 0.0;
    return 0.023 * std::sqrt(5000.0 / static_cast<double>(m)) + 0.007;
}

std::string EnsembleReport::key_value() const
{
    std::string s;
    auto line = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
    line("m", std::to_string(m));
    for (std::size_t k = 0; k < ks_per_marginal.size(); ++k) line("ks_" + std::to_string(k), fmt(ks_per_marginal[k]));
    line("ks_threshold", fmt(ks_threshold));
    line("ks_critical", fmt(ks_critical));
    line("energy_distance", fmt(energy_distance));
    line("total_prob_drift", fmt(total_prob_drift));
    line("node_aborts", std::to_string(node_aborts));
    line("window_exits", std::to_string(window_exits));
    line("causal_violations", std::to_string(causal_violations));
    line("containment_violations", std::to_string(containment_violations));
    line("acceptance", fmt(acceptance));
    return s;
}

std::string EnsembleReport::csv_header() const
{
    std::string s = "m";
    for (std::size_t k = 0; k < ks_per_marginal.size(); ++k) s += ",ks_" + std::to_string(k);
    s += ",ks_threshold,ks_critical,energy_distance,total_prob_drift,node_aborts,window_exits,"
         "causal_violations,containment_violations,acceptance";
    return s;
}

std::string EnsembleReport::csv_row() const
{
    std::string s = std::to_string(m);
    for (double k : ks_per_marginal) s += "," + fmt(k);
    s += "," + fmt(ks_threshold) + "," + fmt(ks_critical) + "," + fmt(energy_distance) + "," + fmt(total_prob_drift) +
         "," + std::to_string(node_aborts) + "," + std::to_string(window_exits) + "," +
         std::to_string(causal_violations) + "," + std::to_string(containment_violations) + "," + fmt(acceptance);
    return s;
}

std::vector<GateOutcome> evaluate_gates(const EnsembleReport& r)
{
    std::vector<GateOutcome> gates;
    const double threshold = ks_gate(r.m);
    for (std::size_t k = 0; k < r.ks_per_marginal.size(); ++k)
        gates.push_back({"ks_" + std::to_string(k), r.m > 0 && r.ks_per_marginal[k] < threshold,
                         fmt(r.ks_per_marginal[k]) + " < " + fmt(threshold)});
    gates.push_back({"total_prob_drift", r.total_prob_drift < 1e-4, fmt(r.total_prob_drift) + " < 1e-4"});
    const double lost = r.node_aborts + r.window_exits;
    gates.push_back({"node_aborts", r.m > 0 && lost < 1e-3 * static_cast<double>(r.m),
                     std::to_string(r.node_aborts) + " aborts + " + std::to_string(r.window_exits) +
                         " exits < 0.1% of " + std::to_string(r.m)});
    gates.push_back({"causal_violations", r.causal_violations == 0, std::to_string(r.causal_violations) + " == 0"});
    gates.push_back({"containment_violations", r.containment_violations == 0,
                     std::to_string(r.containment_violations) + " == 0"});
    return gates;
}

EnsembleRun run_ensemble(const MultiTimeWave& psi, const FoliationSpec& spec, const EnsembleSetup& setup)
{
    const auto start = std::chrono::steady_clock::now();
    EnsembleRun run;
    const LeafDensity initial(psi, spec, setup.t0, setup.windows);
    run.initial = sample(initial, setup.m, setup.seed);
    run.transported = transport(run.initial.configs, psi, spec, setup.t0, setup.t1, setup.transport);
    const LeafDensity target(psi, spec, setup.t1, setup.windows);
    run.comparison = compare(run.transported.final, target, setup.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<double> grid;
    const int points = std::max(2, setup.z_points);
    for (int i = 0; i < points; ++i) grid.push_back(setup.t0 + (setup.t1 - setup.t0) * i / (points - 1));
    grid.back() = setup.t1;
    run.scan = total_probability_scan(psi, spec, grid, setup.windows);

    auto& r = run.report;
    r.m = setup.m;
    r.ks_per_marginal = run.comparison.ks;
    r.ks_threshold = ks_gate(setup.m);
    r.ks_critical = run.comparison.ks_critical;
    r.energy_distance = run.comparison.energy;
    r.total_prob_drift = run.scan.max_drift;
    r.node_aborts = run.transported.node_aborts;
    r.window_exits = run.transported.window_exits;
    r.causal_violations = run.transported.causal_violations;
    r.containment_violations = run.transported.containment_violations;
    r.acceptance = run.initial.acceptance();
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    run.gates = evaluate_gates(r);
    run.pass = std::all_of(run.gates.begin(), run.gates.end(), [](const auto& g) { return g.pass; });
    return run;
}

} // namespace hbd
