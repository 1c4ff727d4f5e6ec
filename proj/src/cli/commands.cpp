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

#include "hbd/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>

#include "hbd/cli/output.hpp"
#include "hbd/cli/scenario.hpp"
#include "hbd/cli/svg.hpp"
#include "hbd/dynamics.hpp"
#include "hbd/equivariance.hpp"
#include "hbd/foliation.hpp"

namespace hbd::cli {

namespace fs = std::filesystem;

namespace {

const char* const kParticleColors[] = {"#1f5fa8", "#c2491d", "#2a8a3e", "#7b3fa0"};

struct Context {
    Scenario scenario;
    FoliationSpec spec;
    Manifest manifest;
    fs::path dir;

    fs::path file(const std::string& suffix) const { return dir / (scenario.prefix + suffix); }

    void write(const std::string& suffix, const std::string& content)
    {
        write_atomic(file(suffix), content);
        manifest.outputs.push_back(scenario.prefix + suffix);
    }

    int finish(int code, const std::string& command)
    {
        manifest.exit_code = code;
        write_atomic(file("_" + command + "_manifest.json"), manifest.to_json());
        return code;
    }
};

Context open(const CommandOptions& opts, const std::string& command)
{
    Context ctx{load_scenario(opts.scenario_path), {}, {}, fs::path(opts.out_dir)};
    ctx.spec = ctx.scenario.foliation();
    if (opts.seed) ctx.scenario.ensemble.seed = *opts.seed;
    ctx.manifest.command = command;
    ctx.manifest.scenario = opts.scenario_path;
    ctx.manifest.scenario_hash = fnv1a(ctx.scenario.text);
    ctx.manifest.seed = ctx.scenario.ensemble.seed;
    ctx.manifest.velocity_scale = opts.velocity_scale;
    return ctx;
}

std::vector<Interval> windows_for(const Scenario& s, const FoliationSpec& spec, int n)
{
    if (!s.windows.empty()) return s.windows;
    return std::vector<Interval>(static_cast<std::size_t>(n), spec.window.x);
}

IntegratorOptions integrator_for(const Scenario& s, const FoliationSpec& spec, int n, double velocity_scale)
{
    IntegratorOptions o;
    o.h = s.integrator.h;
    o.tol = s.integrator.tol;
    o.rtol = s.integrator.rtol;
    o.eps_node = s.integrator.eps_node;
    o.velocity_scale = velocity_scale;
    o.windows = windows_for(s, spec, n);
    return o;
}

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

std::string interval_text(Interval iv)
{
    auto end = [](double v) { return std::isfinite(v) ? num(v) : (v < 0 ? "-inf" : "inf"); };
    return "[" + end(iv.lo) + ", " + end(iv.hi) + "]";
}

// Groups consecutive grid rows with the same degenerate x-set.
std::vector<std::string> degeneracy_map(const ValidationReport& report)
{
    std::vector<std::string> lines;
    std::size_t i = 0;
    const auto& rows = report.degeneracy;
    auto same = [](const DegeneracyRow& a, const DegeneracyRow& b) {
        if (a.x_intervals.size() != b.x_intervals.size()) return false;
        for (std::size_t k = 0; k < a.x_intervals.size(); ++k)
            if (std::abs(a.x_intervals[k].lo - b.x_intervals[k].lo) > 1e-9 ||
                std::abs(a.x_intervals[k].hi - b.x_intervals[k].hi) > 1e-9)
                return false;
        return true;
    };
    while (i < rows.size()) {
        std::size_t j = i;
        while (j + 1 < rows.size() && same(rows[i], rows[j + 1])) ++j;
        std::string line = "  t in [" + num(rows[i].t) + ", " + num(rows[j].t) + "]: x in";
        for (const auto& iv : rows[i].x_intervals) line += " " + interval_text(iv);
        lines.push_back(line);
        i = j + 1;
    }
    return lines;
}

std::vector<double> linspace(double lo, double hi, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

// Event of one particle at the first stored sample with t >= t_query.
Event position_at(const Trajectory& tr, int particle, double t_query)
{
    for (const auto& smp : tr.samples)
        if (smp.t >= t_query) return smp.points[static_cast<std::size_t>(particle)];
    return tr.samples.back().points[static_cast<std::size_t>(particle)];
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn)
{
    try {
        return fn();
    } catch (const ScenarioError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitGateFailure;
    }
}

} // namespace

int cmd_validate(const CommandOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        Context ctx = open(opts, "validate");
        const Scenario& s = ctx.scenario;
        const ValidationReport report = validate(ctx.spec);
        std::ostringstream text;
        text << "foliation: " << ctx.spec.name << "\n";
        text << "max |f_x|: " << num(report.max_abs_fx) << " at t = " << num(report.max_abs_fx_t)
             << ", x = " << num(report.max_abs_fx_x) << "\n";
        text << "spacelike violations: " << report.spacelike_violations << "\n";
        text << "null points: " << report.null_points << "\n";
        text << "monotone: " << (report.declared_monotone ? "declared" : "not declared")
             << ", min f_t = " << num(report.min_f_t) << ", points with f_t < 0: " << report.monotone_violations
             << "\n";
        for (const auto& [tb, jump] : report.breakpoint_residuals)
            text << "breakpoint t = " << num(tb) << ": max jump " << num(jump) << "\n";
        if (report.has_degeneracy()) {
            text << "degeneracy map:\n";
            for (const auto& line : degeneracy_map(report)) text << line << "\n";
        } else {
            text << "degeneracy map: none\n";
        }

        auto& gates = ctx.manifest.gates;
        gates.push_back({"spacelike", report.spacelike_ok(), std::to_string(report.spacelike_violations) + " violations"});
        gates.push_back({"continuity", report.continuity_ok(), "breakpoint jumps <= 1e-6"});
        gates.push_back({"monotone", report.monotone_ok(), std::to_string(report.monotone_violations) + " points"});
        try {
            check_scenario(s, ctx.spec);
            gates.push_back({"scenario", true, "windows and times inside the foliation window"});
        } catch (const ScenarioError& e) {
            gates.push_back({"scenario", false, e.what()});
        }
        if (s.has_wave()) {
            // Residual of the free Dirac equation at each packet centre, relative to |psi|.
            const MultiTimeWave psi = s.wave();
            double worst = 0.0;
            for (std::size_t a = 0; a < psi.terms().size(); ++a)
                for (std::size_t j = 0; j < psi.terms()[a].factors.size(); ++j) {
                    const auto& w = psi.terms()[a].factors[j];
                    for (double x0 : {0.0, 0.7}) {
                        const Event e{x0, s.terms[a].factors[j].x_center};
                        const double scale = std::max(w(e).norm(), 1e-300);
                        worst = std::max(worst, dirac_residual(w, e, 1e-4) / scale);
                    }
                }
            text << "dirac residual (relative, h = 1e-4): " << num(worst) << "\n";
            gates.push_back({"dirac_residual", worst < 1e-5, num(worst) + " < 1e-5"});
        }
        bool pass = true;
        for (const auto& g : gates) {
            text << (g.pass ? "PASS " : "FAIL ") << g.name << ": " << g.detail << "\n";
            pass = pass && g.pass;
        }
        text << (pass ? "valid\n" : "invalid\n");
        out << text.str();
        ctx.write("_validate.txt", text.str());
        return ctx.finish(pass ? kExitPass : kExitUsage, "validate");
    });
}

int cmd_worldlines(const CommandOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        Context ctx = open(opts, "worldlines");
        const Scenario& s = ctx.scenario;
        check_scenario(s, ctx.spec);
        if (s.worldlines.initial.empty()) throw ScenarioError("worldlines.initial is empty");
        const MultiTimeWave psi = s.wave();
        const int n = psi.n_particles();
        const IntegratorOptions iopts = integrator_for(s, ctx.spec, n, opts.velocity_scale);

        std::vector<Trajectory> trajs;
        for (const auto& row : s.worldlines.initial)
            trajs.push_back(integrate(psi, ctx.spec, s.worldlines.t0, row, s.worldlines.t1, iopts));

        std::string csv = "line,t,k,x0,x1,v0,v1,on_plateau\n";
        std::string kinks = "line,k,t_enter,t_exit,x0,x1,dir_in0,dir_in1,dir_out0,dir_out1,angle,near_lightlike\n";
        double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
        for (std::size_t l = 0; l < trajs.size(); ++l) {
            const auto& tr = trajs[l];
            for (const auto& smp : tr.samples)
                for (int k = 0; k < n; ++k) {
                    const auto& p = smp.points[static_cast<std::size_t>(k)];
                    const auto& v = smp.v_after[static_cast<std::size_t>(k)];
                    csv += std::to_string(l) + "," + num(smp.t) + "," + std::to_string(k) + "," + num(p.x0) + "," +
                           num(p.x1) + "," + num(v[0]) + "," + num(v[1]) + "," +
                           std::to_string(smp.on_plateau[static_cast<std::size_t>(k)]) + "\n";
                    xlo = std::min(xlo, p.x1);
                    xhi = std::max(xhi, p.x1);
                }
            for (const auto& kink : tr.kinks) {
                const Event e = position_at(tr, kink.particle, kink.t_enter);
                kinks += std::to_string(l) + "," + std::to_string(kink.particle) + "," + num(kink.t_enter) + "," +
                         num(kink.t_exit) + "," + num(e.x0) + "," + num(e.x1) + "," + num(kink.dir_in[0]) + "," +
                         num(kink.dir_in[1]) + "," + num(kink.dir_out[0]) + "," + num(kink.dir_out[1]) + "," +
                         num(kink.angle) + "," + (kink.near_lightlike ? "1" : "0") + "\n";
            }
        }

        // Figure: leaves thin, world lines thick, kinks as dots.
        const double pad = 0.1 * std::max(1.0, xhi - xlo);
        const Interval xr{xlo - pad, xhi + pad};
        const auto leaf_ts = linspace(s.worldlines.t0, s.worldlines.t1, std::max(2, s.worldlines.leaves));
        const auto xs = linspace(xr.lo, xr.hi, 401);
        double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
        for (double t : leaf_ts)
            for (double x : xs) {
                ylo = std::min(ylo, ctx.spec.f(t, x));
                yhi = std::max(yhi, ctx.spec.f(t, x));
            }
        const double ypad = 0.05 * std::max(1e-3, yhi - ylo);
        SvgPlot svg(900, 640, xr, {ylo - ypad, yhi + ypad});
        svg.frame("x1", "x0");
        svg.title("world lines on " + ctx.spec.name);
        for (double t : leaf_ts) {
            std::vector<Point> leaf;
            for (double x : xs) leaf.emplace_back(x, ctx.spec.f(t, x));
            svg.polyline(leaf, "#888", 0.7, 0.8);
        }
        for (const auto& tr : trajs)
            for (int k = 0; k < n; ++k) {
                std::vector<Point> line;
                for (const auto& smp : tr.samples) {
                    const auto& p = smp.points[static_cast<std::size_t>(k)];
                    line.emplace_back(p.x1, p.x0);
                }
                svg.polyline(line, kParticleColors[k % 4], 2.4);
            }
        for (const auto& tr : trajs)
            for (const auto& kink : tr.kinks) {
                const Event e = position_at(tr, kink.particle, kink.t_enter);
                svg.marker({e.x1, e.x0}, 4.5, "#d62728");
            }

        ctx.write("_worldlines.csv", csv);
        ctx.write("_kinks.csv", kinks);
        ctx.write("_worldlines.svg", svg.str(ctx.manifest.run_hash()));
        for (std::size_t l = 0; l < trajs.size(); ++l) {
            const auto& tr = trajs[l];
            double max_angle = 0.0;
            for (const auto& k : tr.kinks) max_angle = std::max(max_angle, k.angle);
            out << "line " << l << ": " << to_string(tr.status) << ", " << tr.steps << " steps, " << tr.kinks.size()
                << " kinks";
            if (!tr.kinks.empty()) out << " (max angle " << num(max_angle) << ")";
            if (!tr.message.empty()) out << ", " << tr.message;
            out << "\n";
        }
        return ctx.finish(kExitPass, "worldlines");
    });
}

int cmd_equivariance(const CommandOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        Context ctx = open(opts, "equivariance");
        const Scenario& s = ctx.scenario;
        check_scenario(s, ctx.spec);
        if (s.ensemble.m == 0) throw ScenarioError("ensemble.M must be positive");
        const MultiTimeWave psi = s.wave();
        const int n = psi.n_particles();

        EnsembleSetup setup;
        setup.windows = windows_for(s, ctx.spec, n);
        setup.m = s.ensemble.m;
        setup.seed = s.ensemble.seed;
        setup.t0 = s.ensemble.t0;
        setup.t1 = s.ensemble.t1;
        setup.z_points = s.ensemble.z_points;
        setup.transport.integrator = integrator_for(s, ctx.spec, n, opts.velocity_scale);
        setup.transport.threads = std::max(1, opts.threads);
        if (s.region) {
            setup.transport.region = *s.region;
            setup.transport.region_t = s.region_t.value_or(Interval{setup.t0, setup.t1});
        } else if (!ctx.spec.plateaus.empty() && !ctx.spec.plateaus.front().x_intervals.empty()) {
            const auto& plateau = ctx.spec.plateaus.front();
            const Interval t_iv{std::max(plateau.t_interval.lo, setup.t0), std::min(plateau.t_interval.hi, setup.t1)};
            if (t_iv.lo < t_iv.hi) {
                setup.transport.region = plateau.x_intervals.front();
                setup.transport.region_t = t_iv;
            }
        }

        const EnsembleRun run = run_ensemble(psi, ctx.spec, setup);
        ctx.manifest.gates = run.gates;
        std::string text = run.report.key_value();
        for (const auto& g : run.gates) text += std::string(g.pass ? "PASS " : "FAIL ") + g.name + ": " + g.detail + "\n";
        text += run.pass ? "equivariance: pass\n" : "equivariance: fail\n";
        ctx.write("_ensemble.txt", text);
        char wall[64];
        std::snprintf(wall, sizeof wall, "wall_time = %.1f s\n", run.report.wall_time);
        out << text << wall;
        ctx.write("_ensemble.csv", run.report.csv_header() + "\n" + run.report.csv_row() + "\n");
        if (s.dump_ensemble) {
            std::string dump = "sample,t,k,x0,x1\n";
            for (std::size_t i = 0; i < run.transported.final.size(); ++i)
                for (int k = 0; k < n; ++k) {
                    const auto& c = run.transported.final[i];
                    const auto& p = c.points[static_cast<std::size_t>(k)];
                    dump += std::to_string(i) + "," + num(c.t) + "," + std::to_string(k) + "," + num(p.x0) + "," +
                            num(p.x1) + "\n";
                }
            ctx.write("_transported.csv", dump);
        }
        return ctx.finish(run.pass ? kExitPass : kExitGateFailure, "equivariance");
    });
}

int cmd_plots(const CommandOptions& opts, const std::string& which, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        if (which != "foliation" && which != "g" && which != "f" && which != "surface-c")
            throw ScenarioError("unknown plot '" + which + "' (expected foliation, g, f or surface-c)");
        Context ctx = open(opts, "plots-" + which);
        const FoliationSpec& spec = ctx.spec;
        const Interval tr{std::max(finite_or(spec.window.t.lo, -4.0), -4.0), std::min(finite_or(spec.window.t.hi, 4.0), 4.0)};
        const Interval xr{std::max(finite_or(spec.window.x.lo, -4.0), -4.0), std::min(finite_or(spec.window.x.hi, 4.0), 4.0)};
        const std::string hash = ctx.manifest.run_hash();

        if (which == "g") {
            const auto xs = linspace(-3.0, 3.0, 601);
            std::string csv = "x,g\n";
            std::vector<Point> curve;
            for (double x : xs) {
                curve.emplace_back(x, g_profile(x));
                csv += num(x) + "," + num(g_profile(x)) + "\n";
            }
            SvgPlot svg(720, 480, {-3.0, 3.0}, {-1.2, 1.2});
            svg.frame("x", "g(x)", 6);
            svg.title("profile g");
            svg.polyline({{-3.0, 0.0}, {3.0, 0.0}}, "#bbb", 0.8);
            svg.polyline(curve, "#1f5fa8", 2.0);
            ctx.write("_g.csv", csv);
            ctx.write("_g.svg", svg.str(hash));
        } else if (which == "foliation") {
            const auto ts = linspace(tr.lo, tr.hi, 21);
            const auto xs = linspace(xr.lo, xr.hi, 401);
            double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
            std::string csv = "t,x,f\n";
            for (double t : ts)
                for (double x : xs) {
                    const double f = spec.f(t, x);
                    ylo = std::min(ylo, f);
                    yhi = std::max(yhi, f);
                    csv += num(t) + "," + num(x) + "," + num(f) + "\n";
                }
            const double pad = 0.05 * std::max(1e-3, yhi - ylo);
            SvgPlot svg(900, 640, xr, {ylo - pad, yhi + pad});
            svg.frame("x1", "x0");
            svg.title("leaves of " + spec.name);
            for (double t : ts) {
                std::vector<Point> leaf;
                for (double x : xs) leaf.emplace_back(x, spec.f(t, x));
                svg.polyline(leaf, "#1f5fa8", 1.0, 0.85);
            }
            ctx.write("_foliation.csv", csv);
            ctx.write("_foliation.svg", svg.str(hash));
        } else if (which == "f") {
            constexpr int kN = 41;
            const auto ts = linspace(tr.lo, tr.hi, kN);
            const auto xs = linspace(xr.lo, xr.hi, kN);
            std::vector<std::array<double, 3>> grid;
            std::string csv = "t,x,f\n";
            double flo = std::numeric_limits<double>::infinity(), fhi = -flo;
            for (double t : ts)
                for (double x : xs) {
                    const double f = spec.f(t, x);
                    grid.push_back({t, x, f});
                    flo = std::min(flo, f);
                    fhi = std::max(fhi, f);
                    csv += num(t) + "," + num(x) + "," + num(f) + "\n";
                }
            const std::array<Interval, 3> ranges{tr, xr, Interval{flo, std::max(fhi, flo + 1e-9)}};
            SvgPlot svg(800, 640, {0, 1}, {0, 1});
            svg.title("f(t, x) for " + spec.name);
            wireframe(svg, Projection3D(ranges, 35.0, 25.0, 800, 640), grid, kN, kN, {"t", "x", "f"}, ranges);
            ctx.write("_f.csv", csv);
            ctx.write("_f.svg", svg.str(hash));
        } else {
            constexpr int kN = 41;
            for (double x2 : {-2.0, 3.0}) {
                const Mesh mesh = surface_c_mesh(spec, x2, tr, xr, kN, kN);
                std::vector<std::array<double, 3>> grid;
                std::string csv = "t,x1,x0_1,x0_2\n";
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (const auto& v : mesh.vertices) {
                    grid.push_back({v.x1, v.x0_1, v.x0_2});
                    lo = std::min({lo, v.x0_1, v.x0_2});
                    hi = std::max({hi, v.x0_1, v.x0_2});
                    csv += num(v.t) + "," + num(v.x1) + "," + num(v.x0_1) + "," + num(v.x0_2) + "\n";
                }
                const Interval zr{lo, std::max(hi, lo + 1e-9)};
                const std::array<Interval, 3> ranges{xr, zr, zr};
                SvgPlot svg(800, 640, {0, 1}, {0, 1});
                svg.title("surface C section, x2 = " + num(x2));
                wireframe(svg, Projection3D(ranges, 35.0, 25.0, 800, 640), grid, mesh.nt, mesh.nx,
                          {"x1", "x0 (1)", "x0 (2)"}, ranges);
                const std::string tag = x2 < 0 ? "_surface_c_m2" : "_surface_c_p3";
                ctx.write(tag + ".csv", csv);
                ctx.write(tag + ".svg", svg.str(hash));
            }
        }
        for (const auto& f : ctx.manifest.outputs) out << "wrote " << (ctx.dir / f).string() << "\n";
        return ctx.finish(kExitPass, "plots-" + which);
    });
}

} // namespace hbd::cli
