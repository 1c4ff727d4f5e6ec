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

// Runs the acceptance suite and prints one PASS/FAIL line per item.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hbd/cli/scenario.hpp"
#include "hbd/dynamics.hpp"
#include "hbd/equivariance.hpp"
#include "hbd/error.hpp"
#include "hbd/foliation.hpp"
#include "hbd/rng.hpp"

using namespace hbd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<double> linspace(double lo, double hi, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

struct Suite {
    std::string scenario_dir;
    int threads = 1;

    cli::Scenario entangled;
    cli::Scenario product;
    cli::Scenario backward;
    EnsembleRun main_run;
    double main_seconds = 0.0;

    EnsembleSetup setup_for(const cli::Scenario& s, const FoliationSpec& spec, double velocity_scale) const
    {
        EnsembleSetup setup;
        setup.windows = s.windows;
        setup.m = s.ensemble.m;
        setup.seed = s.ensemble.seed;
        setup.t0 = s.ensemble.t0;
        setup.t1 = s.ensemble.t1;
        setup.z_points = s.ensemble.z_points;
        auto& io = setup.transport.integrator;
        io.h = s.integrator.h;
        io.tol = s.integrator.tol;
        io.rtol = s.integrator.rtol;
        io.eps_node = s.integrator.eps_node;
        io.velocity_scale = velocity_scale;
        io.windows = s.windows;
        setup.transport.threads = threads;
        if (!spec.plateaus.empty()) {
            setup.transport.region = spec.plateaus.front().x_intervals.front();
            setup.transport.region_t = spec.plateaus.front().t_interval;
            setup.transport.probe_times = {spec.plateaus.front().t_interval.lo, spec.plateaus.front().t_interval.hi};
        }
        return setup;
    }

    Outcome equivariance()
    {
        const auto spec = entangled.foliation();
        const auto psi = entangled.wave();
        const auto start = std::chrono::steady_clock::now();
        main_run = run_ensemble(psi, spec, setup_for(entangled, spec, 1.0));
        main_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto& r = main_run.report;
        Outcome o;
        o.pass = main_run.pass && main_seconds < 300.0 && r.m == 5000;
        o.detail = "M=" + std::to_string(r.m) + " ks=" + fmt("%.4f", r.ks_per_marginal[0]) + "," +
                   fmt("%.4f", r.ks_per_marginal[1]) + " gate=" + fmt("%.3f", r.ks_threshold) +
                   " aborts=" + std::to_string(r.node_aborts) + " exits=" + std::to_string(r.window_exits) +
                   " time=" + fmt("%.1fs", main_seconds) + " threads=" + std::to_string(threads);
        return o;
    }

    Outcome conservation()
    {
        const auto psi = entangled.wave();
        Outcome o{true, ""};
        const std::vector<std::pair<FoliationSpec, Interval>> cases{
            {flat_foliation(), {-2.0, 2.0}},
            {appendix_foliation(), {-2.0, 2.0}},
            {appendix_f2_foliation(), {-2.0, 2.0}},
            {backward_example(), {-0.9, 0.9}}};
        for (const auto& [spec, range] : cases) {
            const auto grid = linspace(range.lo, range.hi, 41);
            const auto scan = total_probability_scan(psi, spec, grid, entangled.windows);
            o.pass = o.pass && scan.max_drift < 1e-4;
            o.detail += spec.name + "=" + fmt("%.2e", scan.max_drift) + " ";
        }
        return o;
    }

    Outcome plateau_freeze() const
    {
        const auto& tr = main_run.transported;
        int frozen = 0, moved = 0;
        for (const auto& probes : tr.probes) {
            const std::size_t n = probes.size() / 2;
            for (std::size_t k = 0; k < n; ++k) {
                const double before = probes[k];
                const double after = probes[n + k];
                if (!(before < -kHalfPi)) continue;
                ++frozen;
                if (!(before == after)) ++moved;
            }
        }
        Outcome o;
        o.pass = frozen > 0 && moved == 0 && tr.containment_violations == 0 && tr.containment_checked > 0;
        o.detail = std::to_string(frozen) + " frozen particles, " + std::to_string(moved) + " moved, " +
                   std::to_string(tr.containment_violations) + "/" + std::to_string(tr.containment_checked) +
                   " containment violations";
        return o;
    }

    std::vector<std::vector<double>> plateau_starts() const
    {
        std::vector<std::vector<double>> starts;
        for (const auto& c : main_run.initial.configs) {
            if (c.points[0].x1 < -kHalfPi) starts.push_back({c.points[0].x1, c.points[1].x1});
            if (starts.size() == 100) break;
        }
        return starts;
    }

    int kink_causal_violations = 0;

    Outcome kinks()
    {
        const auto spec = entangled.foliation();
        const auto psi_e = entangled.wave();
        const auto psi_p = product.wave();
        IntegratorOptions io;
        io.h = entangled.integrator.h;
        io.tol = entangled.integrator.tol;
        io.rtol = entangled.integrator.rtol;
        io.windows = entangled.windows;
        const auto starts = plateau_starts();
        int big = 0, product_kinks = 0;
        double max_angle = 0.0;
        for (const auto& x0 : starts) {
            const auto te = integrate(psi_e, spec, entangled.ensemble.t0, x0, entangled.ensemble.t1, io);
            for (const auto& k : te.kinks) {
                if (k.angle > 1e-3) ++big;
                max_angle = std::max(max_angle, k.angle);
            }
            const auto tp = integrate(psi_p, spec, entangled.ensemble.t0, x0, entangled.ensemble.t1, io);
            product_kinks += static_cast<int>(detect_kinks(tp, 1e-6).size());
            kink_causal_violations += causal_character(te, spec.monotone).violations;
            kink_causal_violations += causal_character(tp, spec.monotone).violations;
        }
        Outcome o;
        o.pass = starts.size() == 100 && big >= 1 && product_kinks == 0;
        o.detail = std::to_string(starts.size()) + " lines: entangled " + std::to_string(big) +
                   " kinks > 1e-3 (max " + fmt("%.3f", max_angle) + " rad), product " +
                   std::to_string(product_kinks) + " kinks > 1e-6";
        return o;
    }

    Outcome causality()
    {
        const auto spec = backward.foliation();
        const auto run = run_ensemble(backward.wave(), spec, setup_for(backward, spec, 1.0));
        const int main_v = main_run.report.causal_violations;
        const int back_v = run.report.causal_violations;
        Outcome o;
        o.pass = main_v == 0 && back_v == 0 && kink_causal_violations == 0;
        o.detail = "appendix " + std::to_string(main_v) + ", backward " + std::to_string(back_v) + " (M=" +
                   std::to_string(run.report.m) + ", ks=" + fmt("%.4f", run.report.ks_per_marginal[0]) + "," +
                   fmt("%.4f", run.report.ks_per_marginal[1]) + "), kink lines " +
                   std::to_string(kink_causal_violations);
        return o;
    }

    Outcome kernel()
    {
        const auto psi = entangled.wave();
        const std::vector<std::pair<FoliationSpec, Interval>> cases{
            {flat_foliation(), {-2.0, 2.0}},
            {appendix_foliation(), {-2.0, 2.0}},
            {appendix_f2_foliation(), {-3.0, 3.0}},
            {backward_example(), {-0.9, 0.9}}};
        Outcome o{true, ""};
        Rng rng(2024);
        for (const auto& [spec, range] : cases) {
            double worst = 0.0;
            int done = 0, skipped = 0;
            while (done < 1000) {
                const double t = rng.uniform(range.lo, range.hi);
                const std::vector<double> xs{rng.uniform(-8.0, -2.0), rng.uniform(0.0, 6.0)};
                const Configuration c = on_leaf(spec, t, xs);
                try {
                    const auto v = config_velocity(psi, spec, c);
                    worst = std::max(worst, kernel_check(psi, spec, t, c, v));
                    ++done;
                } catch (const NodeError&) {
                    ++skipped;
                } catch (const RankError&) {
                    ++skipped;
                }
            }
            o.pass = o.pass && worst < 1e-8;
            o.detail += spec.name + "=" + fmt("%.1e", worst) + " ";
            if (skipped) o.detail += "(" + std::to_string(skipped) + " nodes skipped) ";
        }
        return o;
    }

    Outcome residual_slopes()
    {
        const SingleParticleWave w(1.0, {{15.0, EnergySign::Positive, {0.6, 0.0}},
                                         {-12.0, EnergySign::Negative, {0.0, 0.8}}});
        const SingleParticleWave w2(1.0, {{9.0, EnergySign::Positive, {1.0, 0.0}},
                                          {-7.0, EnergySign::Positive, {0.5, 0.3}}});
        const MultiTimeWave psi({1.0, 1.0}, {{{1.0, 0.0}, {w, w2}}, {{0.0, 0.7}, {w2, w}}});
        const Event e{0.3, -0.4};
        const std::vector<Event> events{{0.3, -0.4}, {-0.2, 0.9}};
        auto slope = [](const std::function<double(double)>& r) {
            return std::log(r(1e-3) / r(1e-5)) / std::log(100.0);
        };
        auto cont = [&](double h) {
            double s = 0.0;
            for (double v : continuity_residual(psi, events, 0, h)) s = std::max(s, std::abs(v));
            return s;
        };
        const double sd = slope([&](double h) { return dirac_residual(w, e, h); });
        const double sc = slope(cont);
        Outcome o;
        o.pass = std::abs(sd - 2.0) <= 0.1 && std::abs(sc - 2.0) <= 0.1;
        o.detail = "dirac slope " + fmt("%.3f", sd) + ", continuity slope " + fmt("%.3f", sc);
        return o;
    }

    Outcome reparametrization()
    {
        const auto a = appendix_foliation();
        const auto b = appendix_f2_foliation();
        Outcome o{true, ""};
        for (double t : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
            try {
                const auto r = reparam_match(a, b, t, {-5.0, 5.0});
                o.pass = o.pass && r.sup_residual < 1e-6;
                o.detail += fmt("t=%g", t) + "->" + fmt("%.6f", r.t) + " (" + fmt("%.1e", r.sup_residual) + ") ";
            } catch (const NoMatch& e) {
                o.pass = false;
                o.detail += fmt("t=%g no match ", t);
            }
        }
        return o;
    }

    Outcome no_signaling()
    {
        const auto spec = entangled.foliation();
        const std::vector<double> ts{-1.0, 0.0, 1.0};
        const auto probes = linspace(-7.5, -2.5, 11);
        const double d = no_signaling_marginal(entangled.wave(), spec, {-20.0, -kHalfPi}, ts, probes,
                                               entangled.windows, 0);
        return {d < 1e-3, "sup relative drift " + fmt("%.2e", d)};
    }

    Outcome negative_controls()
    {
        const auto spec = entangled.foliation();
        const auto scaled = run_ensemble(entangled.wave(), spec, setup_for(entangled, spec, 1.1));
        const bool scaled_fails = !scaled.pass;

        const bool tilted_fails = !validate(tilted_foliation(2.0)).ok();

        // Straight line with a superluminal middle segment.
        const auto flat = flat_foliation();
        Trajectory fake;
        const double xs[] = {0.0, 0.5, 2.0, 2.5};
        for (int i = 0; i < 4; ++i) {
            TrajectorySample s;
            s.t = i;
            s.points = {flat.event(i, xs[i])};
            fake.samples.push_back(s);
        }
        const bool fake_fails = causal_character(fake, true).violations > 0;

        Outcome o;
        o.pass = scaled_fails && tilted_fails && fake_fails;
        o.detail = "x1.1 velocity ks=" + fmt("%.4f", scaled.report.ks_per_marginal[0]) + "," +
                   fmt("%.4f", scaled.report.ks_per_marginal[1]) + (scaled_fails ? " fails" : " PASSES") +
                   "; t+2x " + (tilted_fails ? "rejected" : "ACCEPTED") + "; spacelike segment " +
                   (fake_fails ? "flagged" : "MISSED");
        return o;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance suite"};
    Suite suite;
    suite.scenario_dir = HBD_SCENARIO_DIR;
    suite.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app.add_option("--scenarios", suite.scenario_dir, "directory holding appendix*.json and backward.json");
    app.add_option("--threads", suite.threads, "transport threads");
    CLI11_PARSE(app, argc, argv);

    try {
        suite.entangled = cli::load_scenario(suite.scenario_dir + "/appendix.json");
        suite.product = cli::load_scenario(suite.scenario_dir + "/appendix_product.json");
        suite.backward = cli::load_scenario(suite.scenario_dir + "/backward.json");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    struct Item {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Item> items{
        {1, "equivariance through the plateau", [&] { return suite.equivariance(); }},
        {2, "conservation of Z(t)", [&] { return suite.conservation(); }},
        {3, "plateau freeze and containment", [&] { return suite.plateau_freeze(); }},
        {4, "kink dichotomy", [&] { return suite.kinks(); }},
        {5, "causal character", [&] { return suite.causality(); }},
        {6, "kernel of the current form", [&] { return suite.kernel(); }},
        {7, "residual convergence order", [&] { return suite.residual_slopes(); }},
        {8, "reparametrization", [&] { return suite.reparametrization(); }},
        {9, "no-signaling marginal", [&] { return suite.no_signaling(); }},
        {10, "negative controls", [&] { return suite.negative_controls(); }},
    };
    int failures = 0;
    for (const auto& item : items) {
        Outcome o;
        try {
            o = item.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("[%2d] %-4s %s: %s\n", item.id, o.pass ? "PASS" : "FAIL", item.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu passed\n", static_cast<int>(items.size()) - failures, items.size());
    return failures == 0 ? 0 : 1;
}
