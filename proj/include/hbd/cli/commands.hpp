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
#include <iosfwd>
#include <optional>
#include <string>

namespace hbd::cli {

// Exit codes shared by every command.
inline constexpr int kExitPass = 0;
inline constexpr int kExitGateFailure = 1;
inline constexpr int kExitUsage = 2;

struct CommandOptions {
    std::string scenario_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int threads = 1;
    double velocity_scale = 1.0;  // negative controls only
};

int cmd_validate(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_worldlines(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_equivariance(const CommandOptions& opts, std::ostream& out, std::ostream& err);
// which: foliation, g, f, surface-c
int cmd_plots(const CommandOptions& opts, const std::string& which, std::ostream& out, std::ostream& err);

} // namespace hbd::cli
