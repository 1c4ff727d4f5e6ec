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

#include "hbd/cli/output.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "hbd/error.hpp"

namespace hbd::cli {

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw Error("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot rename '" + tmp.string() + "': " + ec.message());
}

std::uint64_t fnv1a(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string num(double v)
{
    char buf[32];
    for (int precision = 6; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string Manifest::run_hash() const
{
    const std::string key = command + '\n' + hex64(scenario_hash) + '\n' + std::to_string(seed) + '\n' +
                            num(velocity_scale);
    return hex64(fnv1a(key));
}

std::string Manifest::to_json() const
{
    nlohmann::ordered_json j;
    j["tool"] = "hbd";
    j["version"] = HBD_VERSION;
    j["command"] = command;
    j["scenario"] = scenario;
    j["scenario_hash"] = hex64(scenario_hash);
    j["run_hash"] = run_hash();
    j["seed"] = seed;
    j["velocity_scale"] = velocity_scale;
    j["outputs"] = outputs;
    j["gates"] = nlohmann::ordered_json::array();
    for (const auto& g : gates) j["gates"].push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
    j["exit_code"] = exit_code;
    return j.dump(2) + "\n";
}

} // namespace hbd::cli
