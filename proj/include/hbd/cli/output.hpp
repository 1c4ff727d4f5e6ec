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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hbd/equivariance.hpp"

namespace hbd::cli {

// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

// Shortest round-trip decimal form, fixed across runs on one platform.
std::string num(double v);

struct Manifest {
    std::string command;
    std::string scenario;
    std::uint64_t scenario_hash = 0;
    std::uint64_t seed = 0;
    double velocity_scale = 1.0;
    std::vector<std::string> outputs;
    std::vector<GateOutcome> gates;
    int exit_code = 0;

    // Hash of everything that determines the outputs.
    std::string run_hash() const;
    std::string to_json() const;
};

} // namespace hbd::cli
