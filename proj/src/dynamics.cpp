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

#include "hbd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hbd/error.hpp"

namespace hbd {

namespace {

// Time at which a segment-interior quantity is evaluated: endpoints are replaced by
// their one-ulp inward neighbours so the branch of f_t belonging to the segment is used.
double inside(double t, double a, double b)
{
    if (t <= a) return std::nextafter(a, b);
    if (t >= b) return std::nextafter(b, a);
    return t;
}

class VelocityField {
public:
    VelocityField(const MultiTimeWave& psi, const FoliationSpec& spec, VelocityOptions opts)
        : psi_(psi), spec_(spec), opts_(opts), n_(psi.n_particles()),
          events_(static_cast<std::size_t>(n_)), covectors_(static_cast<std::size_t>(n_)),
          f_t_(static_cast<std::size_t>(n_))
    {
    }

    // Full velocities at leaf parameter t for reduced positions y.
    void operator()(double t, std::span<const double> y, std::vector<Vector2>& out)
    {
        out.assign(static_cast<std::size_t>(n_), Vector2{0.0, 0.0});
        bool any_moving = false;
        for (int k = 0; k < n_; ++k) {
            events_[k] = {spec_.f(t, y[k]), y[k]};
            covectors_[k] = {1.0, -spec_.f_x(t, y[k])};
            f_t_[k] = spec_.f_t(t, y[k]);
            if (std::abs(f_t_[k]) > spec_.eps_deg) any_moving = true;
        }
        if (!any_moving) return;

        const Eigen::VectorXcd psi = psi_(events_);
        const double density = full_contraction(psi, n_, covectors_);
        if (!(density > opts_.eps_node * opts_.reference_scale))
            throw NodeError("wave-function node: |m.j| = " + std::to_string(density), t);
        for (int k = 0; k < n_; ++k) {
            if (std::abs(f_t_[k]) <= spec_.eps_deg) continue;
            const Vector2 j = slot_contraction(psi, n_, k, covectors_);
            const double denom = covectors_[k][0] * j[0] + covectors_[k][1] * j[1];
            const double v1 = opts_.velocity_scale * f_t_[k] * j[1] / denom;
            out[k] = {f_t_[k] - covectors_[k][1] * v1, v1};
        }
    }

    std::vector<unsigned char> frozen(double t, std::span<const double> y) const
    {
        std::vector<unsigned char> flags(static_cast<std::size_t>(n_));
        for (int k = 0; k < n_; ++k) flags[k] = degeneracy_at(spec_, t, y[k]) ? 1 : 0;
        return flags;
    }

    double density(double t, std::span<const double> y)
    {
        for (int k = 0; k < n_; ++k) {
            events_[k] = {spec_.f(t, y[k]), y[k]};
            covectors_[k] = {1.0, -spec_.f_x(t, y[k])};
        }
        return full_contraction(psi_(events_), n_, covectors_);
    }

    int size() const { return n_; }

private:
    const MultiTimeWave& psi_;
    const FoliationSpec& spec_;
    VelocityOptions opts_;
    int n_;
    std::vector<Event> events_;
    std::vector<Covector> covectors_;
    std::vector<double> f_t_;
};

class Stepper {
public:
    Stepper(VelocityField& field, double a, double b) : field_(field), a_(a), b_(b) {}

    std::vector<double> slope(double t, std::span<const double> y)
    {
        field_(inside(t, a_, b_), y, full_);
        std::vector<double> v(full_.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = full_[k][1];
        return v;
    }

    std::vector<double> rk4(double t, std::span<const double> y, double h,
                            const std::vector<double>* k1_known = nullptr)
    {
        const std::size_t n = y.size();
        const std::vector<double> k1 = k1_known ? *k1_known : slope(t, y);
        std::vector<double> tmp(n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        const std::vector<double> k2 = slope(t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        const std::vector<double> k3 = slope(t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
        const std::vector<double> k4 = slope(t + h, tmp);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return out;
    }

private:
    VelocityField& field_;
    double a_;
    double b_;
    std::vector<Vector2> full_;
};

Vector2 unit(const Vector2& v)
{
    const double norm = std::hypot(v[0], v[1]);
    return {v[0] / norm, v[1] / norm};
}

bool is_zero(const Vector2& v) { return v[0] == 0.0 && v[1] == 0.0; }

} // namespace

double Configuration::max_on_leaf_residual(const FoliationSpec& spec) const
{
    double worst = 0.0;
    for (const auto& p : points) worst = std::max(worst, std::abs(p.x0 - spec.f(t, p.x1)));
    return worst;
}

Configuration on_leaf(const FoliationSpec& spec, double t, std::span<const double> xs)
{
    Configuration config;
    config.t = t;
    for (double x : xs) config.points.push_back(spec.event(t, x));
    return config;
}

const char* to_string(TrajectoryStatus status)
{
    switch (status) {
    case TrajectoryStatus::Completed: return "completed";
    case TrajectoryStatus::NodeAbort: return "node_abort";
    case TrajectoryStatus::WindowExit: return "window_exit";
    }
    return "unknown";
}

Vector2 slot_current(const MultiTimeWave& psi, const FoliationSpec& spec, const Configuration& config,
                     int k)
{
    const int n = psi.n_particles();
    if (config.size() != n) throw ArityMismatch("slot_current: configuration has wrong size");
    std::vector<Covector> covectors;
    for (const auto& p : config.points) covectors.push_back(scaled_normal(spec, config.t, p.x1));
    return slot_contraction(psi(config.points), n, k, covectors);
}

std::vector<Vector2> config_velocity(const MultiTimeWave& psi, const FoliationSpec& spec,
                                     const Configuration& config, const VelocityOptions& opts)
{
    if (config.size() != psi.n_particles())
        throw ArityMismatch("config_velocity: configuration has wrong size");
    VelocityField field(psi, spec, opts);
    std::vector<double> y;
    for (const auto& p : config.points) y.push_back(p.x1);
    std::vector<Vector2> out;
    field(config.t, y, out);
    return out;
}

Trajectory integrate(const MultiTimeWave& psi, const FoliationSpec& spec, const Configuration& config0,
                     double t1, const IntegratorOptions& opts)
{
    std::vector<double> xs;
    for (const auto& p : config0.points) xs.push_back(p.x1);
    return integrate(psi, spec, config0.t, xs, t1, opts);
}

Trajectory integrate(const MultiTimeWave& psi, const FoliationSpec& spec, double t0,
                     std::span<const double> x0, double t1, const IntegratorOptions& opts)
{
    const int n = psi.n_particles();
    if (static_cast<int>(x0.size()) != n) throw ArityMismatch("integrate: wrong number of positions");
    if (!(t1 > t0)) throw std::invalid_argument("integrate: need t0 < t1");
    std::vector<Interval> windows = opts.windows;
    if (windows.empty()) windows.assign(static_cast<std::size_t>(n), spec.window.x);
    if (static_cast<int>(windows.size()) != n)
        throw std::invalid_argument("integrate: one window per particle");

    std::vector<double> bounds{t0, t1};
    for (double tb : spec.t_breakpoints)
        if (tb > t0 && tb < t1) bounds.push_back(tb);
    for (const auto& plateau : spec.plateaus)
        for (double tb : {plateau.t_interval.lo, plateau.t_interval.hi})
            if (tb > t0 && tb < t1) bounds.push_back(tb);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    VelocityOptions vopts{opts.eps_node, opts.node_reference, opts.velocity_scale};
    Trajectory traj;
    std::vector<double> y(x0.begin(), x0.end());
    if (vopts.reference_scale <= 0.0) {
        VelocityField probe(psi, spec, vopts);
        vopts.reference_scale = probe.density(inside(t0, bounds[0], bounds[1]), y);
    }
    VelocityField field(psi, spec, vopts);

    auto events_at = [&](double t, std::span<const double> yy) {
        std::vector<Event> ev;
        for (double x : yy) ev.push_back(spec.event(t, x));
        return ev;
    };
    auto outside = [&](std::span<const double> yy) {
        for (int k = 0; k < n; ++k)
            if (!windows[k].contains(yy[k])) return true;
        return false;
    };

    constexpr double eps = std::numeric_limits<double>::epsilon();
    traj.stop_t = t0;
    try {
        for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
            const double a = bounds[s];
            const double b = bounds[s + 1];
            Stepper stepper(field, a, b);
            std::vector<Vector2> vel;
            field(inside(a, a, b), y, vel);
            if (s == 0) {
                traj.samples.push_back({a, events_at(a, y), vel, vel, field.frozen(inside(a, a, b), y)});
            } else {
                traj.samples.back().v_after = vel;
                traj.samples.back().on_plateau = field.frozen(inside(a, a, b), y);
            }
            auto record = [&](double t, const std::vector<Vector2>& v_left) {
                TrajectorySample sample{t, events_at(t, y), v_left, v_left,
                                        field.frozen(inside(t, a, b), y)};
                traj.samples.push_back(std::move(sample));
                traj.stop_t = t;
            };

            std::vector<double> k1(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) k1[k] = vel[k][1];
            double t = a;
            double h = opts.h;
            while (t < b) {
                double step = std::min(h, b - t);
                if (b - (t + step) < 1e-12 * std::max(1.0, std::abs(b))) step = b - t;
                const std::vector<double> y_full = stepper.rk4(t, y, step, &k1);
                const std::vector<double> y_mid = stepper.rk4(t, y, 0.5 * step, &k1);
                const std::vector<double> y_half = stepper.rk4(t + 0.5 * step, y_mid, 0.5 * step);
                // Near plateau edges f_t decays faster than any power, so an absolute
                // tolerance alone lets tiny chords tilt; X0 = f(t, X1) is exact.
                bool ok = true;
                for (int k = 0; k < n && ok; ++k) {
                    const double err = std::abs(y_half[k] - y_full[k]) / 15.0;
                    const double lift = std::abs(spec.f(t + step, y[k]) - spec.f(t, y[k]));
                    const double floor = 4.0 * eps * std::max(1.0, std::abs(y[k]));
                    ok = err <= std::min(opts.tol, std::max(floor, opts.rtol * lift));
                }
                if (!ok && step > std::ldexp(opts.h, -opts.max_halvings)) {
                    h = 0.5 * step;
                    ++traj.rejected_steps;
                    continue;
                }
                const double t_new = step == b - t ? b : t + step;

                const auto status_start = field.frozen(inside(t, a, b), y);
                const auto status_end = field.frozen(inside(t_new, a, b), y_half);
                if (status_start != status_end) {
                    double lo = 0.0, hi = t_new - t;
                    while (hi - lo > opts.event_tol) {
                        const double mid = 0.5 * (lo + hi);
                        const auto ym = stepper.rk4(t, y, mid, &k1);
                        if (field.frozen(inside(t + mid, a, b), ym) == status_start) lo = mid;
                        else hi = mid;
                    }
                    const double t_start = t;
                    const std::vector<double> y_start = y;
                    if (lo > 0.0) {
                        y = stepper.rk4(t_start, y_start, lo, &k1);
                        t = t_start + lo;
                        field(inside(t, a, b), y, vel);
                        record(t, vel);
                        ++traj.steps;
                    }
                    const double t_hi = hi == t_new - t_start ? t_new : t_start + hi;
                    y = stepper.rk4(t, y, t_hi - t);
                    t = t_hi;
                    field(inside(t, a, b), y, vel);
                    record(t, vel);
                    ++traj.steps;
                    for (int k = 0; k < n; ++k) k1[k] = vel[k][1];
                    if (outside(y)) throw TrajectoryStatus::WindowExit;
                    continue;
                }

                y = y_half;
                t = t_new;
                field(inside(t, a, b), y, vel);
                record(t, vel);
                ++traj.steps;
                for (int k = 0; k < n; ++k) k1[k] = vel[k][1];
                if (outside(y)) throw TrajectoryStatus::WindowExit;
                h = std::min(opts.h, 2.0 * step);
            }
        }
    } catch (const NodeError& e) {
        traj.status = TrajectoryStatus::NodeAbort;
        traj.stop_t = e.t;
        traj.message = e.what();
    } catch (TrajectoryStatus status) {
        traj.status = status;
        traj.message = "particle left its spatial window";
    }
    traj.kinks = detect_kinks(traj, opts.theta_kink);
    return traj;
}

std::vector<KinkEvent> plateau_crossings(const Trajectory& traj)
{
    std::vector<KinkEvent> out;
    if (traj.samples.empty()) return out;
    const int n = static_cast<int>(traj.samples.front().points.size());
    struct Piece {
        double t;
        Vector2 v;
    };
    for (int k = 0; k < n; ++k) {
        std::vector<Piece> pieces;
        for (std::size_t i = 0; i < traj.samples.size(); ++i) {
            const auto& s = traj.samples[i];
            if (i > 0) pieces.push_back({s.t, s.v_before[k]});
            pieces.push_back({s.t, s.v_after[k]});
        }
        std::size_t i = 0;
        while (i < pieces.size()) {
            if (!is_zero(pieces[i].v)) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < pieces.size() && is_zero(pieces[j].v)) ++j;
            if (i > 0 && j < pieces.size()) {
                KinkEvent ev;
                ev.particle = k;
                ev.t_enter = pieces[i].t;
                ev.t_exit = pieces[j - 1].t;
                ev.dir_in = unit(pieces[i - 1].v);
                ev.dir_out = unit(pieces[j].v);
                const double cross = ev.dir_in[0] * ev.dir_out[1] - ev.dir_in[1] * ev.dir_out[0];
                const double dot = ev.dir_in[0] * ev.dir_out[0] + ev.dir_in[1] * ev.dir_out[1];
                ev.angle = std::atan2(std::abs(cross), std::abs(dot));
                auto near_null = [](const Vector2& d) { return std::abs(d[0]) - std::abs(d[1]) < 1e-6; };
                ev.near_lightlike = near_null(ev.dir_in) || near_null(ev.dir_out);
                out.push_back(ev);
            }
            i = j;
        }
    }
    return out;
}

std::vector<KinkEvent> detect_kinks(const Trajectory& traj, double theta)
{
    std::vector<KinkEvent> kinks;
    for (const auto& ev : plateau_crossings(traj))
        if (ev.angle > theta) kinks.push_back(ev);
    return kinks;
}

CausalReport causal_character(const Trajectory& traj, bool monotone)
{
    CausalReport report;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
        const auto& p = traj.samples[i].points;
        const auto& q = traj.samples[i + 1].points;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double d0 = q[k].x0 - p[k].x0;
            const double d1 = q[k].x1 - p[k].x1;
            const double scale = std::max({1.0, std::abs(p[k].x0), std::abs(p[k].x1),
                                           std::abs(q[k].x0), std::abs(q[k].x1)});
            const double delta = 4.0 * eps * scale;
            const double time_like = std::abs(d0) + delta;
            const double space_like = std::max(std::abs(d1) - delta, 0.0);
            ++report.pairs_checked;
            bool bad = time_like * time_like - space_like * space_like < -1e-12 * time_like * time_like;
            if (d0 < -delta) {
                ++report.backward_steps;
                if (monotone) bad = true;
            }
            if (bad) {
                if (report.violations == 0) report.worst_t = traj.samples[i].t;
                ++report.violations;
            }
        }
    }
    return report;
}

ContainmentReport region_containment_check(std::span<const Trajectory> trajs, Interval region,
                                           Interval t_interval)
{
    ContainmentReport report;
    const double slack = 1e-12 * std::max(1.0, std::abs(t_interval.lo));
    for (const auto& traj : trajs) {
        if (traj.samples.empty()) continue;
        const std::size_t n = traj.samples.front().points.size();
        auto first = std::find_if(traj.samples.begin(), traj.samples.end(),
                                  [&](const auto& s) { return s.t >= t_interval.lo - slack; });
        if (first == traj.samples.end() || first->t > t_interval.hi) continue;
        for (std::size_t k = 0; k < n; ++k) {
            ++report.checked;
            const bool inside_at_start = region.contains(first->points[k].x1);
            for (auto it = first; it != traj.samples.end() && it->t <= t_interval.hi; ++it) {
                if (region.contains(it->points[k].x1) != inside_at_start) {
                    ++report.violations;
                    break;
                }
            }
        }
    }
    return report;
}

CurrentForm current_form_J(const CurrentTensor& j)
{
    CurrentForm form;
    form.n = j.n;
    form.components.assign(j.components.size(), 0.0);
    // eps_{k nu}: nonzero only for nu = 1 - k, with eps_01 = +1 and eps_10 = -1.
    const std::size_t size = j.components.size();
    for (std::size_t kappa = 0; kappa < size; ++kappa) {
        const std::size_t nu = (~kappa) & (size - 1);
        double sign = 1.0;
        for (int slot = 0; slot < j.n; ++slot)
            if ((kappa >> (j.n - 1 - slot)) & 1U) sign = -sign;
        form.components[kappa] = sign * j.components[nu];
    }
    return form;
}

CurrentForm current_form_J(const MultiTimeWave& psi, const Configuration& config)
{
    return current_form_J(current_tensor(psi, config.points));
}

Eigen::Matrix4d current_form_matrix(const CurrentForm& form)
{
    if (form.n != 2) throw PreconditionError("current_form_matrix: defined for N = 2 only");
    Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
    for (int k1 = 0; k1 < 2; ++k1)
        for (int k2 = 0; k2 < 2; ++k2) {
            const double v = form.components[static_cast<std::size_t>(2 * k1 + k2)];
            omega(k1, 2 + k2) = v;
            omega(2 + k2, k1) = -v;
        }
    return omega;
}

double kernel_check(const MultiTimeWave& psi, const FoliationSpec& spec, double t,
                    const Configuration& config, std::span<const Vector2> velocities)
{
    if (psi.n_particles() != 2 || config.size() != 2 || velocities.size() != 2)
        throw PreconditionError("kernel_check: defined for N = 2 only");
    const CurrentForm form = current_form_J(psi, config);
    const Eigen::Matrix4d omega = current_form_matrix(form);

    Eigen::Matrix<double, 4, 3> tangent = Eigen::Matrix<double, 4, 3>::Zero();
    const double y1 = config.points[0].x1;
    const double y2 = config.points[1].x1;
    tangent(0, 0) = spec.f_t(t, y1);
    tangent(2, 0) = spec.f_t(t, y2);
    tangent(0, 1) = spec.f_x(t, y1);
    tangent(1, 1) = 1.0;
    tangent(2, 2) = spec.f_x(t, y2);
    tangent(3, 2) = 1.0;
    const Eigen::Matrix3d pulled = tangent.transpose() * omega * tangent;

    double scale = 0.0;
    for (double c : form.components) scale = std::max(scale, std::abs(c));
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(pulled, Eigen::ComputeFullV);
    const double sigma = svd.singularValues()(0);
    if (scale == 0.0 || sigma <= 1e-14 * scale * tangent.squaredNorm())
        throw RankError("kernel_check: pulled-back form vanishes (wave-function node)");
    const Eigen::Vector3d kernel = svd.matrixV().col(2);
    const Eigen::Vector3d tau(1.0, velocities[0][1], velocities[1][1]);
    return kernel.cross(tau).norm() / (kernel.norm() * tau.norm());
}

} // namespace hbd
