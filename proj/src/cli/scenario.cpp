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

#include "hbd/cli/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace hbd::cli {

namespace {

using nlohmann::json;

double number(const json& v, const std::string& what)
{
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw ScenarioError(what + ": expected a number");
    return v.get<double>();
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where)
{
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ScenarioError(where + "." + key + ": wrong type");
    }
}

// [lo, hi] where null stands for an unbounded end.
Interval interval(const json& v, const std::string& what)
{
    if (!v.is_array() || v.size() != 2) throw ScenarioError(what + ": expected [lo, hi]");
    Interval iv;
    if (!v[0].is_null()) iv.lo = number(v[0], what);
    if (!v[1].is_null()) iv.hi = number(v[1], what);
    if (!(iv.lo < iv.hi)) throw ScenarioError(what + ": need lo < hi");
    return iv;
}

Complex complex_value(const json& v, const std::string& what)
{
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2) return {number(v[0], what), number(v[1], what)};
    throw ScenarioError(what + ": expected a number or [re, im]");
}

PacketParams packet(const json& v, double mass, const std::string& where)
{
    if (!v.is_object()) throw ScenarioError(where + ": expected an object");
    PacketParams p;
    p.mass = mass;
    p.k_center = get_or(v, "k_center", p.k_center, where);
    p.spread = get_or(v, "spread", p.spread, where);
    p.x_center = get_or(v, "x_center", p.x_center, where);
    p.n_modes = get_or(v, "n_modes", p.n_modes, where);
    p.k_window = get_or(v, "k_window", p.k_window, where);
    if (!(p.spread > 0.0)) throw ScenarioError(where + ".spread must be positive");
    return p;
}

} // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin)
{
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ScenarioError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ScenarioError(origin + ": top level must be an object");

    Scenario s;
    s.origin = origin;
    s.text = text;
    s.name = get_or<std::string>(doc, "name", "scenario", "scenario");
    s.prefix = s.name;

    if (!doc.contains("foliation") || !doc["foliation"].is_object())
        throw ScenarioError(origin + ": missing foliation section");
    const json& fol = doc["foliation"];
    if (!fol.contains("name") || !fol["name"].is_string())
        throw ScenarioError(origin + ": foliation.name is required");
    s.foliation_name = fol["name"].get<std::string>();
    if (s.foliation_name == "tilted") {
        s.tilt_slope = number(fol.value("slope", json(0.0)), "foliation.slope");
    } else if (s.foliation_name == "custom-tabulated") {
        try {
            s.tab_t = fol.at("t_grid").get<std::vector<double>>();
            s.tab_x = fol.at("x_grid").get<std::vector<double>>();
            s.tab_values = fol.at("values").get<std::vector<std::vector<double>>>();
        } catch (const json::exception&) {
            throw ScenarioError(origin + ": custom-tabulated needs t_grid, x_grid and values");
        }
    } else if (s.foliation_name != "flat" && s.foliation_name != "appendix_f" &&
               s.foliation_name != "appendix_f2" && s.foliation_name != "backward") {
        throw ScenarioError(origin + ": unknown foliation '" + s.foliation_name + "'");
    }

    if (doc.contains("wave")) {
        const json& wave = doc["wave"];
        try {
            s.masses = wave.at("masses").get<std::vector<double>>();
        } catch (const json::exception&) {
            throw ScenarioError(origin + ": wave.masses must be a list of numbers");
        }
        if (!wave.contains("terms") || !wave["terms"].is_array() || wave["terms"].empty())
            throw ScenarioError(origin + ": wave.terms must be a non-empty list");
        for (std::size_t i = 0; i < wave["terms"].size(); ++i) {
            const json& term = wave["terms"][i];
            const std::string where = "wave.terms[" + std::to_string(i) + "]";
            WaveTerm wt;
            if (term.contains("coeff")) wt.coeff = complex_value(term["coeff"], where + ".coeff");
            if (!term.contains("factors") || !term["factors"].is_array() ||
                term["factors"].size() != s.masses.size())
                throw ScenarioError(origin + ": " + where + ".factors needs one packet per mass");
            for (std::size_t j = 0; j < s.masses.size(); ++j)
                wt.factors.push_back(packet(term["factors"][j], s.masses[j], where + ".factors"));
            s.terms.push_back(std::move(wt));
        }
    }

    if (doc.contains("windows")) {
        if (!doc["windows"].is_array()) throw ScenarioError(origin + ": windows must be a list");
        for (const auto& w : doc["windows"]) s.windows.push_back(interval(w, "windows"));
        if (!s.masses.empty() && s.windows.size() != s.masses.size())
            throw ScenarioError(origin + ": one window per particle required");
    }

    if (doc.contains("ensemble")) {
        const json& e = doc["ensemble"];
        const auto m = get_or<long long>(e, "M", static_cast<long long>(s.ensemble.m), "ensemble");
        if (m < 0) throw ScenarioError(origin + ": ensemble.M must be non-negative");
        s.ensemble.m = static_cast<std::size_t>(m);
        s.ensemble.seed = get_or<std::uint64_t>(e, "seed", s.ensemble.seed, "ensemble");
        s.ensemble.t0 = get_or(e, "t0", s.ensemble.t0, "ensemble");
        s.ensemble.t1 = get_or(e, "t1", s.ensemble.t1, "ensemble");
        s.ensemble.z_points = get_or(e, "z_points", s.ensemble.z_points, "ensemble");
        if (!(s.ensemble.t1 > s.ensemble.t0)) throw ScenarioError(origin + ": ensemble needs t0 < t1");
    }
    if (doc.contains("integrator")) {
        const json& g = doc["integrator"];
        s.integrator.h = get_or(g, "h", s.integrator.h, "integrator");
        s.integrator.tol = get_or(g, "tol", s.integrator.tol, "integrator");
        s.integrator.rtol = get_or(g, "rtol", s.integrator.rtol, "integrator");
        s.integrator.eps_node = get_or(g, "eps_node", s.integrator.eps_node, "integrator");
        if (!(s.integrator.h > 0.0)) throw ScenarioError(origin + ": integrator.h must be positive");
    }
    if (doc.contains("worldlines")) {
        const json& w = doc["worldlines"];
        s.worldlines.t0 = get_or(w, "t0", s.worldlines.t0, "worldlines");
        s.worldlines.t1 = get_or(w, "t1", s.worldlines.t1, "worldlines");
        s.worldlines.leaves = get_or(w, "leaves", s.worldlines.leaves, "worldlines");
        s.worldlines.initial =
            get_or<std::vector<std::vector<double>>>(w, "initial", {}, "worldlines");
        for (const auto& row : s.worldlines.initial)
            if (row.size() != s.masses.size())
                throw ScenarioError(origin + ": worldlines.initial rows need one position per particle");
        if (!(s.worldlines.t1 > s.worldlines.t0)) throw ScenarioError(origin + ": worldlines needs t0 < t1");
    }
    if (doc.contains("containment")) {
        const json& c = doc["containment"];
        if (c.contains("region")) s.region = interval(c["region"], "containment.region");
        if (c.contains("t")) s.region_t = interval(c["t"], "containment.t");
    }
    if (doc.contains("outputs")) {
        const json& o = doc["outputs"];
        s.prefix = get_or(o, "prefix", s.prefix, "outputs");
        s.dump_ensemble = get_or(o, "dump_ensemble", s.dump_ensemble, "outputs");
    }
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot read scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

FoliationSpec Scenario::foliation() const
{
    if (foliation_name == "flat") return flat_foliation();
    if (foliation_name == "appendix_f") return appendix_foliation();
    if (foliation_name == "appendix_f2") return appendix_f2_foliation();
    if (foliation_name == "backward") return backward_example();
    if (foliation_name == "tilted") return tilted_foliation(tilt_slope);
    if (foliation_name == "custom-tabulated") return tabulated_foliation(name, tab_t, tab_x, tab_values);
    throw ScenarioError("unknown foliation '" + foliation_name + "'");
}

MultiTimeWave Scenario::wave() const
{
    if (terms.empty()) throw ScenarioError(origin + ": scenario has no wave section");
    std::vector<ProductTerm> built;
    for (const auto& term : terms) {
        ProductTerm pt;
        pt.coeff = term.coeff;
        for (const auto& p : term.factors)
            pt.factors.push_back(gaussian_packet(p.mass, p.k_center, p.spread, p.n_modes,
                                                 p.k_window > 0.0 ? p.k_window : 6.0 * p.spread, p.x_center));
        built.push_back(std::move(pt));
    }
    return MultiTimeWave(masses, std::move(built));
}

void check_scenario(const Scenario& s, const FoliationSpec& spec)
{
    for (std::size_t k = 0; k < s.windows.size(); ++k) {
        const Interval w = s.windows[k];
        if (!std::isfinite(w.lo) || !std::isfinite(w.hi))
            throw ScenarioError("windows[" + std::to_string(k) + "] must be finite");
        if (w.lo < spec.window.x.lo || w.hi > spec.window.x.hi)
            throw ScenarioError("windows[" + std::to_string(k) + "] leaves the foliation window");
    }
    auto check_t = [&](double t, const char* what) {
        if (!spec.window.t.contains(t))
            throw ScenarioError(std::string(what) + " lies outside the foliation t range");
    };
    check_t(s.ensemble.t0, "ensemble.t0");
    check_t(s.ensemble.t1, "ensemble.t1");
    if (!s.worldlines.initial.empty()) {
        check_t(s.worldlines.t0, "worldlines.t0");
        check_t(s.worldlines.t1, "worldlines.t1");
    }
}

} // namespace hbd::cli
