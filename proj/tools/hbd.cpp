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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hbd/cli/commands.hpp"

int main(int argc, char** argv)
{
    using namespace hbd::cli;
    CLI::App app{"hbd: Bohm-Dirac trajectories on degenerate time foliations"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::uint64_t seed = 0;
    std::string which;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", opts.scenario_path, "scenario file (JSON with comments)")->required();
        sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override the scenario seed");
        sub->add_option("--threads", opts.threads, "worker threads for transport")->capture_default_str();
        sub->add_option("--debug-velocity-scale", opts.velocity_scale,
                        "NEGATIVE CONTROL ONLY: multiply every velocity by this factor");
    };

    auto* validate = app.add_subcommand("validate", "check the foliation and the wave function");
    auto* worldlines = app.add_subcommand("worldlines", "integrate the configured world lines");
    auto* equivariance = app.add_subcommand("equivariance", "sample, transport and compare an ensemble");
    auto* plots = app.add_subcommand("plots", "write figure SVGs");
    for (auto* sub : {validate, worldlines, equivariance, plots}) add_common(sub);
    plots->add_option("which", which, "foliation, g, f or surface-c")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    for (auto* sub : {validate, worldlines, equivariance, plots})
        if (sub->count("--seed")) opts.seed = seed;

    if (*validate) return cmd_validate(opts, std::cout, std::cerr);
    if (*worldlines) return cmd_worldlines(opts, std::cout, std::cerr);
    if (*equivariance) return cmd_equivariance(opts, std::cout, std::cerr);
    return cmd_plots(opts, which, std::cout, std::cerr);
}
