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
#include <optional>
#include <string>
#include <vector>

#include "hbd/dirac.hpp"
#include "hbd/error.hpp"
#include "hbd/foliation.hpp"

namespace hbd::cli {

class ScenarioError : public Error {
public:
    using Error::Error;
};

struct PacketParams {
    double mass = 1.0;
    double k_center = 0.0;
    double spread = 0.5;
    double x_center = 0.0;
    int n_modes = 64;
    double k_window = 0.0;  // 0 means 6 * spread
};

struct WaveTerm {
    Complex coeff{1.0, 0.0};
    std::vector<PacketParams> factors;
};

struct EnsembleParams {
    std::size_t m = 5000;
    std::uint64_t seed = 1;
    double t0 = -2.0;
    double t1 = 2.0;
    int z_points = 41;
};

struct IntegratorParams {
    double h = 0.05;
    double tol = 1e-8;
    double rtol = 1e-3;
    double eps_node = 1e-10;
};

struct WorldlineParams {
    double t0 = -2.0;
    double t1 = 2.0;
    std::vector<std::vector<double>> initial;  // one row of N positions per run
    int leaves = 17;                           // leaves drawn behind the world lines
};

struct Scenario {
    std::string name;
    std::string origin;  // file path or "<string>"
    std::string text;    // raw document, hashed into manifests

    std::string foliation_name;
    double tilt_slope = 0.0;
    std::vector<double> tab_t;
    std::vector<double> tab_x;
    std::vector<std::vector<double>> tab_values;

    std::vector<double> masses;
    std::vector<WaveTerm> terms;
    std::vector<Interval> windows;  // per particle

    EnsembleParams ensemble;
    IntegratorParams integrator;
    WorldlineParams worldlines;
    std::optional<Interval> region;  // containment region; defaults to the first plateau
    std::optional<Interval> region_t;
    bool dump_ensemble = false;
    std::string prefix;  // output file stem

    FoliationSpec foliation() const;
    MultiTimeWave wave() const;
    bool has_wave() const { return !terms.empty(); }
};

// JSON document; // and /* */ comments are accepted. Throws ScenarioError.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::string& path);

// Checks cross-references: windows inside the foliation window, times inside its t range.
void check_scenario(const Scenario& s, const FoliationSpec& spec);

} // namespace hbd::cli
